//! Exact stochastic SIRS dynamics on random regular graphs.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegrationConfig, Trajectory};
use crate::model::{reduced_field, Params, ReducedState};
use crate::singular::{detect_attractor_with, AttractorCriteria, AttractorReport};

/// Restarts allowed before graph generation gives up.
pub const MAX_GRAPH_ATTEMPTS: usize = 10_000;

/// Simple connected graph in which every node has the same degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularGraph {
    nodes: usize,
    degree: usize,
    /// `adj[u * degree + k]` is the `k`-th neighbour of `u`.
    adj: Vec<u32>,
    /// Slot of `u` in the neighbour list of `adj[u * degree + k]`.
    back: Vec<u32>,
}

impl RegularGraph {
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.adj[u * self.degree..(u + 1) * self.degree]
    }

    /// Build from neighbour lists, checking regularity and simplicity.
    pub fn from_neighbors(lists: &[Vec<u32>]) -> Result<Self> {
        let nodes = lists.len();
        let degree = lists.first().map_or(0, |l| l.len());
        let mut adj = Vec::with_capacity(nodes * degree);
        for (u, l) in lists.iter().enumerate() {
            if l.len() != degree {
                return Err(Error::Inconsistent(format!("node {u} has degree {} instead of {degree}", l.len())));
            }
            for (k, &w) in l.iter().enumerate() {
                if w as usize >= nodes || w as usize == u || l[..k].contains(&w) {
                    return Err(Error::Inconsistent(format!("node {u} has an invalid neighbour {w}")));
                }
                if !lists[w as usize].contains(&(u as u32)) {
                    return Err(Error::Inconsistent(format!("edge {u}-{w} is not symmetric")));
                }
            }
            adj.extend_from_slice(l);
        }
        let mut back = alloc::vec![0u32; nodes * degree];
        for u in 0..nodes {
            for k in 0..degree {
                let w = adj[u * degree + k] as usize;
                let slot = lists[w].iter().position(|&x| x as usize == u).unwrap_or(0);
                back[u * degree + k] = slot as u32;
            }
        }
        Ok(Self { nodes, degree, adj, back })
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes == 0 {
            return true;
        }
        let mut seen = alloc::vec![false; self.nodes];
        let mut stack = alloc::vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in self.neighbors(u) {
                let w = w as usize;
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.nodes
    }
}

/// Pair stubs at random, rejecting loops and repeated edges as they arise;
/// returns `None` when the remaining stubs cannot be completed.
fn pair_stubs(nodes: usize, degree: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<u32>>> {
    let mut stubs: Vec<u32> = (0..nodes as u32).flat_map(|u| core::iter::repeat_n(u, degree)).collect();
    let mut lists: Vec<Vec<u32>> = (0..nodes).map(|_| Vec::with_capacity(degree)).collect();
    let ok = |lists: &[Vec<u32>], a: u32, b: u32| a != b && !lists[a as usize].contains(&b);
    while !stubs.is_empty() {
        let mut chosen = None;
        for _ in 0..64 {
            let i = rng.random_range(0..stubs.len());
            let j = rng.random_range(0..stubs.len());
            if i != j && ok(&lists, stubs[i], stubs[j]) {
                chosen = Some((i, j));
                break;
            }
        }
        if chosen.is_none() {
            // exhaustive search before declaring a dead end
            'outer: for i in 0..stubs.len() {
                for j in i + 1..stubs.len() {
                    if ok(&lists, stubs[i], stubs[j]) {
                        chosen = Some((i, j));
                        break 'outer;
                    }
                }
            }
        }
        let (i, j) = chosen?;
        let (a, b) = (stubs[i], stubs[j]);
        lists[a as usize].push(b);
        lists[b as usize].push(a);
        let (hi, lo) = if i > j { (i, j) } else { (j, i) };
        stubs.swap_remove(hi);
        stubs.swap_remove(lo);
    }
    Some(lists)
}

/// Random simple connected `degree`-regular graph on `nodes` nodes. Stub
/// pairing with on-the-fly rejection is asymptotically uniform for fixed degree.
pub fn generate_regular_graph(nodes: usize, degree: usize, seed: u64) -> Result<RegularGraph> {
    if degree == 0 || nodes <= degree {
        return Err(Error::InvalidParams(format!("need 0 < degree < nodes, got N = {nodes}, n = {degree}")));
    }
    if !(nodes * degree).is_multiple_of(2) {
        return Err(Error::InvalidParams(format!("N n must be even, got N = {nodes}, n = {degree}")));
    }
    if nodes > u32::MAX as usize {
        return Err(Error::InvalidParams("too many nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GRAPH_ATTEMPTS {
        let Some(lists) = pair_stubs(nodes, degree, &mut rng) else { continue };
        let g = RegularGraph::from_neighbors(&lists)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::GraphGeneration(MAX_GRAPH_ATTEMPTS))
}

/// Set of small integers with O(1) insert, remove and uniform sampling.
#[derive(Debug, Clone)]
struct IndexSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl IndexSet {
    fn new(capacity: usize) -> Self {
        Self { items: Vec::new(), pos: alloc::vec![ABSENT; capacity] }
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn insert(&mut self, x: u32) {
        debug_assert_eq!(self.pos[x as usize], ABSENT);
        self.pos[x as usize] = self.items.len() as u32;
        self.items.push(x);
    }

    fn remove(&mut self, x: u32) {
        let p = self.pos[x as usize];
        debug_assert_ne!(p, ABSENT);
        let last = self.items.pop().unwrap_or(x);
        if last != x {
            self.items[p as usize] = last;
            self.pos[last as usize] = p;
        }
        self.pos[x as usize] = ABSENT;
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u32 {
        self.items[rng.random_range(0..self.items.len())]
    }
}

const SUS: u8 = 0;
const INF: u8 = 1;
const REC: u8 = 2;

/// Edge-count slots, in the order `SS, SI, II, SR, IR, RR`.
pub const EDGE_COMPONENTS: [&str; 6] = ["SS", "SI", "II", "SR", "IR", "RR"];
const SS: usize = 0;
const SI: usize = 1;
const II: usize = 2;
const SR: usize = 3;
const IR: usize = 4;
const RR: usize = 5;

/// Sampled output of one stochastic run. Counts are raw; within-state edges
/// are counted from both ends, so `SS`, `II`, `RR` are always even.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimRecord {
    pub seed: u64,
    pub nodes: usize,
    pub degree: usize,
    pub times: Vec<f64>,
    /// `[S, I, R]` per sample.
    pub node_counts: Vec<[u64; 3]>,
    /// `[SS, SI, II, SR, IR, RR]` per sample.
    pub edge_counts: Vec<[u64; 6]>,
    pub events: u64,
}

impl SimRecord {
    /// Sample `k` divided by the population size, in reduced coordinates.
    pub fn normalized(&self, k: usize) -> ReducedState {
        let n = self.nodes as f64;
        let (v, e) = (self.node_counts[k], self.edge_counts[k]);
        ReducedState {
            s: v[0] as f64 / n,
            i: v[1] as f64 / n,
            ss: e[SS] as f64 / n,
            si: e[SI] as f64 / n,
            ii: e[II] as f64 / n,
        }
    }

    /// Largest violation of the node and edge-sum identities over all samples.
    pub fn identity_violation(&self) -> u64 {
        let d = self.degree as i128;
        let mut worst = 0i128;
        for (v, e) in self.node_counts.iter().zip(&self.edge_counts) {
            let v = v.map(i128::from);
            let e = e.map(i128::from);
            let checks = [
                v[0] + v[1] + v[2] - self.nodes as i128,
                e[SS] + e[SI] + e[SR] - d * v[0],
                e[SI] + e[II] + e[IR] - d * v[1],
                e[SR] + e[IR] + e[RR] - d * v[2],
                e[SS] % 2,
                e[II] % 2,
                e[RR] % 2,
            ];
            worst = checks.iter().fold(worst, |m, c| m.max(c.abs()));
        }
        worst as u64
    }
}

/// Event-driven simulation: every SI edge transmits at rate `beta`, every
/// infected node recovers at rate `gamma`, every recovered node loses
/// immunity at rate `epsilon`.
pub fn gillespie_run(
    graph: &RegularGraph,
    p: &Params,
    infected: &[usize],
    t_max: f64,
    sample_dt: f64,
    seed: u64,
) -> Result<SimRecord> {
    if !(p.beta >= 0.0 && p.gamma >= 0.0 && p.epsilon >= 0.0)
        || !p.beta.is_finite()
        || !p.gamma.is_finite()
        || !p.epsilon.is_finite()
    {
        return Err(Error::InvalidParams(format!("rates must be finite and non-negative: {p:?}")));
    }
    if !(t_max >= 0.0 && t_max.is_finite() && sample_dt > 0.0) {
        return Err(Error::InvalidParams(format!("need t_max >= 0 and sample_dt > 0, got {t_max}, {sample_dt}")));
    }
    let nn = graph.nodes;
    let d = graph.degree;
    let mut state = alloc::vec![SUS; nn];
    for &u in infected {
        if u >= nn {
            return Err(Error::InvalidParams(format!("infected node {u} out of range")));
        }
        state[u] = INF;
    }

    let mut si_set = IndexSet::new(nn * d);
    let mut i_set = IndexSet::new(nn);
    let mut r_set = IndexSet::new(nn);
    let mut nodes = [0u64; 3];
    let mut edges = [0u64; 6];
    for u in 0..nn {
        nodes[state[u] as usize] += 1;
        if state[u] == INF {
            i_set.insert(u as u32);
        }
        for k in 0..d {
            let w = graph.adj[u * d + k] as usize;
            match (state[u], state[w]) {
                (SUS, SUS) => edges[SS] += 1,
                (SUS, INF) => {
                    edges[SI] += 1;
                    si_set.insert((u * d + k) as u32);
                }
                (INF, INF) => edges[II] += 1,
                _ => {}
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (t_max / sample_dt).floor() as usize + 1;
    let mut rec = SimRecord {
        seed,
        nodes: nn,
        degree: d,
        times: Vec::with_capacity(samples),
        node_counts: Vec::with_capacity(samples),
        edge_counts: Vec::with_capacity(samples),
        events: 0,
    };
    let mut t = 0.0;
    let mut next_k = 0usize;
    loop {
        let rate_inf = p.beta * si_set.len() as f64;
        let rate_rec = p.gamma * i_set.len() as f64;
        let rate_wane = p.epsilon * r_set.len() as f64;
        let total = rate_inf + rate_rec + rate_wane;
        let t_next = if total > 0.0 {
            let u: f64 = rng.random();
            t - (1.0 - u).ln() / total
        } else {
            f64::INFINITY
        };
        while next_k < samples && (next_k as f64) * sample_dt < t_next {
            rec.times.push(next_k as f64 * sample_dt);
            rec.node_counts.push(nodes);
            rec.edge_counts.push(edges);
            next_k += 1;
        }
        if next_k >= samples {
            break;
        }
        t = t_next;
        rec.events += 1;
        let pick = rng.random::<f64>() * total;
        if pick < rate_inf {
            let id = si_set.sample(&mut rng) as usize;
            let u = id / d;
            set_state(graph, &mut state, u, INF, &mut si_set, &mut edges);
            i_set.insert(u as u32);
            nodes[0] -= 1;
            nodes[1] += 1;
        } else if pick < rate_inf + rate_rec || rate_wane == 0.0 {
            let u = i_set.sample(&mut rng) as usize;
            set_state(graph, &mut state, u, REC, &mut si_set, &mut edges);
            i_set.remove(u as u32);
            r_set.insert(u as u32);
            nodes[1] -= 1;
            nodes[2] += 1;
        } else {
            let u = r_set.sample(&mut rng) as usize;
            set_state(graph, &mut state, u, SUS, &mut si_set, &mut edges);
            r_set.remove(u as u32);
            nodes[2] -= 1;
            nodes[0] += 1;
        }
    }
    Ok(rec)
}

fn edge_slot(a: u8, b: u8) -> usize {
    match (a.min(b), a.max(b)) {
        (SUS, SUS) => SS,
        (SUS, INF) => SI,
        (INF, INF) => II,
        (SUS, REC) => SR,
        (INF, REC) => IR,
        _ => RR,
    }
}

/// Move node `u` to state `new`, updating edge counts and the SI edge set.
fn set_state(graph: &RegularGraph, state: &mut [u8], u: usize, new: u8, si: &mut IndexSet, edges: &mut [u64; 6]) {
    let d = graph.degree;
    let old = state[u];
    for k in 0..d {
        let w = graph.adj[u * d + k] as usize;
        let sw = state[w];
        // within-state edges count twice, mixed edges once
        let weight = |a: u8, b: u8| if a == b { 2 } else { 1 };
        edges[edge_slot(old, sw)] -= weight(old, sw);
        edges[edge_slot(new, sw)] += weight(new, sw);
        let back = w * d + graph.back[u * d + k] as usize;
        match (old, sw) {
            (SUS, INF) => si.remove((u * d + k) as u32),
            (INF, SUS) => si.remove(back as u32),
            _ => {}
        }
        match (new, sw) {
            (SUS, INF) => si.insert((u * d + k) as u32),
            (INF, SUS) => si.insert(back as u32),
            _ => {}
        }
    }
    state[u] = new;
}

/// SplitMix64 step, used to derive independent replica seeds from a root seed.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn replica_seed(root: u64, replica: usize) -> u64 {
    splitmix64(root ^ splitmix64(replica as u64))
}

/// `count` distinct nodes chosen uniformly.
pub fn random_nodes(nodes: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all: Vec<usize> = (0..nodes).collect();
    let count = count.min(nodes);
    for k in 0..count {
        let j = rng.random_range(k..nodes);
        all.swap(k, j);
    }
    all.truncate(count);
    all
}

/// Sequential replicas sharing the graph and the initial infected set.
pub fn run_ensemble(
    graph: &RegularGraph,
    p: &Params,
    infected: &[usize],
    t_max: f64,
    sample_dt: f64,
    root_seed: u64,
    replicas: usize,
) -> Result<Vec<SimRecord>> {
    (0..replicas).map(|r| gillespie_run(graph, p, infected, t_max, sample_dt, replica_seed(root_seed, r))).collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    pub mean: Vec<[f64; 5]>,
    pub q05: Vec<[f64; 5]>,
    pub q50: Vec<[f64; 5]>,
    pub q95: Vec<[f64; 5]>,
}

fn check_grids(records: &[SimRecord]) -> Result<()> {
    let first = records.first().ok_or_else(|| Error::InvalidParams("empty ensemble".into()))?;
    for r in records {
        if r.times != first.times || r.nodes != first.nodes || r.degree != first.degree {
            return Err(Error::Domain("replicas use different sample grids or graphs".into()));
        }
        if r.node_counts.first() != first.node_counts.first() || r.edge_counts.first() != first.edge_counts.first() {
            return Err(Error::Domain("replicas start from different initial conditions".into()));
        }
    }
    Ok(())
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Mean and 5/50/95% quantiles of the normalized reduced coordinates.
pub fn ensemble_summary(records: &[SimRecord]) -> Result<EnsembleSummary> {
    check_grids(records)?;
    let times = records[0].times.clone();
    let mut out = EnsembleSummary { times, mean: Vec::new(), q05: Vec::new(), q50: Vec::new(), q95: Vec::new() };
    let mut column = Vec::with_capacity(records.len());
    for k in 0..out.times.len() {
        let rows: Vec<[f64; 5]> = records.iter().map(|r| r.normalized(k).to_array()).collect();
        let mut mean = [0.0; 5];
        let (mut a, mut b, mut c) = ([0.0; 5], [0.0; 5], [0.0; 5]);
        for comp in 0..5 {
            column.clear();
            column.extend(rows.iter().map(|r| r[comp]));
            mean[comp] = column.iter().sum::<f64>() / column.len() as f64;
            column.sort_by(f64::total_cmp);
            a[comp] = quantile(&column, 0.05);
            b[comp] = quantile(&column, 0.5);
            c[comp] = quantile(&column, 0.95);
        }
        out.mean.push(mean);
        out.q05.push(a);
        out.q50.push(b);
        out.q95.push(c);
    }
    Ok(out)
}

/// Distance between the ensemble mean and the pair-approximation ODE.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonReport {
    /// Sup-norm distance per reduced component `S, I, SS, SI, II`.
    pub sup_norm: [f64; 5],
    pub peak_time_sim: f64,
    pub peak_time_ode: f64,
    pub peak_time_rel_error: f64,
    pub peak_sim: f64,
    pub peak_ode: f64,
    pub replicas: usize,
    pub ode: Vec<[f64; 5]>,
    pub mean: Vec<[f64; 5]>,
    pub times: Vec<f64>,
}

fn argmax(v: impl Iterator<Item = f64>) -> (usize, f64) {
    v.enumerate().fold((0, f64::NEG_INFINITY), |best, (k, x)| if x > best.1 { (k, x) } else { best })
}

/// Compare the ensemble-mean trajectory with the reduced ODE solved from the
/// same normalized initial state on the same sample grid.
pub fn compare_to_ode(records: &[SimRecord], p: &Params) -> Result<ComparisonReport> {
    check_grids(records)?;
    let times = records[0].times.clone();
    let mean: Vec<[f64; 5]> = (0..times.len())
        .map(|k| {
            let mut m = [0.0; 5];
            for r in records {
                let x = r.normalized(k).to_array();
                for c in 0..5 {
                    m[c] += x[c];
                }
            }
            m.map(|v| v / records.len() as f64)
        })
        .collect();
    let x0 = records[0].normalized(0);
    x0.check_delta(p.n)?;
    if (records[0].degree as f64) != p.n {
        return Err(Error::Domain(format!("graph degree {} differs from n = {}", records[0].degree, p.n)));
    }

    let ode: Vec<[f64; 5]> = if times.len() < 2 {
        alloc::vec![x0.to_array(); times.len()]
    } else {
        let dt = times[1] - times[0];
        let horizon = times[times.len() - 1] - times[0];
        let cfg = IntegrationConfig::new(horizon).tolerances(1e-10, 1e-13).sample_every(dt);
        let q = *p;
        let tr = integrate(move |_, x| reduced_field(x, &q), times[0], x0.to_array(), &cfg)?;
        if tr.states.len() < times.len() {
            return Err(Error::Inconsistent("ODE samples do not cover the simulation grid".into()));
        }
        tr.states[..times.len()].to_vec()
    };

    let mut sup = [0.0f64; 5];
    for (a, b) in mean.iter().zip(&ode) {
        for c in 0..5 {
            sup[c] = sup[c].max((a[c] - b[c]).abs());
        }
    }
    let (ks, peak_sim) = argmax(mean.iter().map(|x| x[1]));
    let (ko, peak_ode) = argmax(ode.iter().map(|x| x[1]));
    let (ts, to) = (times[ks], times[ko]);
    let rel = if ts == to { 0.0 } else { (ts - to).abs() / to.abs().max(f64::MIN_POSITIVE) };
    Ok(ComparisonReport {
        sup_norm: sup,
        peak_time_sim: ts,
        peak_time_ode: to,
        peak_time_rel_error: rel,
        peak_sim,
        peak_ode,
        replicas: records.len(),
        ode,
        mean,
        times,
    })
}

/// Best-effort periodicity check on a single stochastic run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeriodicityProbe {
    pub report: AttractorReport,
    /// Samples in the moving-average window applied to `I`.
    pub window: usize,
    /// Always set: demographic noise makes peak statistics unreliable, so the
    /// verdict is indicative only.
    pub caveat: bool,
}

/// Smooth `I` with a centred moving average and apply the attractor criteria
/// to the last fifth of the record.
pub fn probe_periodicity(record: &SimRecord, p: &Params, window: usize) -> PeriodicityProbe {
    let w = window.max(1);
    let raw: Vec<[f64; 5]> = (0..record.times.len()).map(|k| record.normalized(k).to_array()).collect();
    let half = w / 2;
    let smoothed: Vec<[f64; 5]> = (0..raw.len())
        .map(|k| {
            let lo = k.saturating_sub(half);
            let hi = (k + half + 1).min(raw.len());
            let mut m = raw[k];
            m[1] = raw[lo..hi].iter().map(|x| x[1]).sum::<f64>() / (hi - lo) as f64;
            m
        })
        .collect();
    let traj = Trajectory {
        times: record.times.clone(),
        states: smoothed,
        regime: crate::integrate::Regime::Full,
        events: Vec::new(),
        termination: crate::integrate::Termination::Completed,
        labels: Vec::new(),
        tail_start: None,
        steps_accepted: 0,
        steps_rejected: 0,
    };
    let report = detect_attractor_with(&traj, p, &AttractorCriteria::default());
    PeriodicityProbe { report, window: w, caveat: true }
}
