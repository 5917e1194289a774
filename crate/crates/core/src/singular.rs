//! Singular orbits: fast jumps chained with slow passages, the interval test
//! for transversal returns, and attractor classification of full runs.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::bifurcation::refine_equilibrium;
use crate::error::{Error, Result};
use crate::fastslow::{entry_root_g, entry_root_h, exit_time, parabola_exit, ss_infinity, EntryExitRecord};
use crate::integrate::{integrate_layer, Direction, Event, IntegrationConfig, Termination, Trajectory};
use crate::model::{geometry, r0, Params, ReducedState, SlowPoint};

/// Fast jump from a repelling point of the critical manifold.
pub fn pi1_fast(point: SlowPoint, p: &Params) -> Result<SlowPoint> {
    let s = entry_root_h(point.s, point.ss, p)?;
    Ok(SlowPoint { s, ss: ss_infinity(point.s, point.ss, s, p.n)? })
}

/// Infected seed placed next to a critical-manifold point to start the layer flow.
pub fn layer_seed(point: SlowPoint, delta: f64, n: f64) -> ReducedState {
    let s = point.s - delta;
    let ss = (point.ss * (1.0 - delta)).min(n * s - delta);
    ReducedState { s, i: delta, ss, si: delta, ii: delta }
}

/// Landing point of the layer flow started from [`layer_seed`], integrated
/// until the infected mass `I + SI + II` falls below `1e-12`.
pub fn layer_landing(point: SlowPoint, p: &Params, delta: f64) -> Result<SlowPoint> {
    let seed = layer_seed(point, delta, p.n);
    let q = p.with_epsilon(0.0);
    let cfg = IntegrationConfig::new(1e4).tolerances(1e-11, 1e-14).with_event(Event::new(
        |_, y: &[f64; 5]| y[1] + y[3] + y[4] - 1e-12,
        Direction::Falling,
        true,
    ));
    let tr = integrate_layer(&q, seed, &cfg)?;
    if tr.termination != Termination::Event {
        return Err(Error::NoConvergence { iterations: tr.steps_accepted, residual: tr.last().1[1] });
    }
    let (_, y) = tr.last();
    Ok(SlowPoint { s: y[0], ss: y[2] })
}

/// Root-based jump together with the landing of a direct layer integration.
pub fn pi1_fast_verified(point: SlowPoint, p: &Params, delta: f64) -> Result<(SlowPoint, SlowPoint)> {
    Ok((pi1_fast(point, p)?, layer_landing(point, p, delta)?))
}

/// Slow passage from an attracting entry to its exit point.
pub fn pi2_slow(entry: SlowPoint, p: &Params) -> Result<SlowPoint> {
    Ok(exit_time(entry, p)?.exit)
}

/// How the landing point of a fast jump is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Landing {
    /// `S` from the `H` root and `SS` from the constant of motion.
    #[default]
    Exact,
    /// Land on the parabola above the `G` root and exit by the parabola map.
    Parabola,
}

/// One turn of the singular orbit, `Pi2 o Pi1`.
pub fn return_map(point: SlowPoint, p: &Params, landing: Landing) -> Result<(SlowPoint, EntryExitRecord)> {
    match landing {
        Landing::Exact => {
            let entry = pi1_fast(point, p)?;
            Ok((entry, exit_time(entry, p)?))
        }
        Landing::Parabola => {
            let s = entry_root_g(point.s, p)?;
            let entry = SlowPoint::on_parabola(s, p.n);
            let exit = parabola_exit(s, p)?;
            let rec = EntryExitRecord {
                entry,
                exit_time: ((1.0 - s) / (1.0 - exit.s)).ln(),
                exit,
                method: crate::fastslow::ExitMethod::ClosedForm,
            };
            Ok((entry, rec))
        }
    }
}

pub const CYCLE_TOL: f64 = 1e-8;
pub const CYCLE_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CandidateCycle {
    /// Last iterate on the exit section.
    pub point: SlowPoint,
    pub converged: bool,
    pub iterations: usize,
    /// `|S_{k+1} - S_k|` at the final iteration.
    pub step: f64,
    pub history: Vec<SlowPoint>,
}

fn admissible_start(pt: SlowPoint, p: &Params) -> bool {
    pt.s > 0.0 && pt.s < 1.0 && pt.ss > geometry(p).l_line(pt.s) && pt.ss <= p.n * pt.s
}

/// Iterate the singular return map from the parabola point above `s0_init`.
pub fn find_candidate_cycle(p: &Params, s0_init: f64) -> Result<CandidateCycle> {
    p.validate()?;
    let r = r0(p)?;
    if r <= 1.0 {
        return Err(Error::Domain(format!("singular cycles need R0 > 1, got {r}")));
    }
    let mut x = SlowPoint::on_parabola(s0_init, p.n);
    if !admissible_start(x, p) {
        return Err(Error::Domain(format!("start {x:?} is not on the repelling part of the manifold")));
    }
    let mut history = alloc::vec![x];
    let mut step = f64::INFINITY;
    for k in 1..=CYCLE_MAX_ITER {
        let (_, rec) =
            return_map(x, p, Landing::Exact).map_err(|e| Error::Divergence { iteration: k, reason: e.to_string() })?;
        let mut next = rec.exit;
        let mut weight = 1.0;
        // damp overshoots out of the admissible region
        while !admissible_start(next, p) {
            weight *= 0.5;
            if weight < 1e-3 {
                return Err(Error::Divergence {
                    iteration: k,
                    reason: format!("image {:?} left the repelling region", rec.exit),
                });
            }
            next = SlowPoint { s: x.s + weight * (rec.exit.s - x.s), ss: x.ss + weight * (rec.exit.ss - x.ss) };
        }
        step = (next.s - x.s).abs();
        x = next;
        history.push(x);
        if step < CYCLE_TOL {
            return Ok(CandidateCycle { point: x, converged: true, iterations: k, step, history });
        }
    }
    Ok(CandidateCycle { point: x, converged: false, iterations: CYCLE_MAX_ITER, step, history })
}

pub const INTERVAL_SAMPLES: usize = 21;
pub const INTERVAL_WIDTH: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    Transversal,
    NoIntersection,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSample {
    pub j1: SlowPoint,
    /// Entry (`J2`) and exit (`J3`) images, or the error that stopped the sample.
    pub image: Result<(SlowPoint, SlowPoint)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalImage {
    pub s0: f64,
    pub samples: Vec<IntervalSample>,
    pub verdict: Verdict,
}

impl IntervalImage {
    pub fn j2(&self) -> impl Iterator<Item = SlowPoint> + '_ {
        self.samples.iter().filter_map(|s| s.image.as_ref().ok().map(|x| x.0))
    }

    pub fn j3(&self) -> impl Iterator<Item = SlowPoint> + '_ {
        self.samples.iter().filter_map(|s| s.image.as_ref().ok().map(|x| x.1))
    }

    pub fn failures(&self) -> usize {
        self.samples.iter().filter(|s| s.image.is_err()).count()
    }
}

/// `J1`: `count` points at fixed `S` spread over `width` in `SS` around `center`.
pub fn interval_grid(center: SlowPoint, width: f64, count: usize) -> Vec<SlowPoint> {
    if width == 0.0 || count < 2 {
        return alloc::vec![center];
    }
    (0..count)
        .map(|k| SlowPoint { s: center.s, ss: center.ss - 0.5 * width + width * k as f64 / (count - 1) as f64 })
        .collect()
}

/// Map one `J1` point through the fast jump and the slow passage.
pub fn map_interval_point(point: SlowPoint, p: &Params) -> Result<(SlowPoint, SlowPoint)> {
    let entry = pi1_fast(point, p)?;
    Ok((entry, pi2_slow(entry, p)?))
}

/// Decide transversality from mapped samples: the offset `SS_J3 - SS_J1`
/// must change sign between consecutive samples with a nonzero secant slope.
pub fn assemble_interval(s0: f64, samples: Vec<IntervalSample>) -> IntervalImage {
    let offsets: Vec<(f64, f64)> =
        samples.iter().filter_map(|s| s.image.as_ref().ok().map(|(_, j3)| (s.j1.ss, j3.ss - s.j1.ss))).collect();
    let verdict = if samples.len() < 2 || offsets.len() < 2 {
        Verdict::Undecided
    } else {
        let crossing = offsets.windows(2).any(|w| {
            let (a, b) = (w[0], w[1]);
            let slope = (b.1 - a.1) / (b.0 - a.0);
            a.1.signum() != b.1.signum() && slope.is_finite() && slope != 0.0
        });
        if crossing {
            Verdict::Transversal
        } else {
            Verdict::NoIntersection
        }
    };
    IntervalImage { s0, samples, verdict }
}

/// Map a small segment `J1` through the singular return map and test whether
/// its image `J3` crosses it transversally.
pub fn interval_test(p: &Params, candidate: SlowPoint, width: f64) -> IntervalImage {
    interval_test_with(p, candidate, width, INTERVAL_SAMPLES)
}

pub fn interval_test_with(p: &Params, candidate: SlowPoint, width: f64, count: usize) -> IntervalImage {
    let samples = interval_grid(candidate, width, count)
        .into_iter()
        .map(|j1| IntervalSample { j1, image: map_interval_point(j1, p) })
        .collect();
    assemble_interval(candidate.s, samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AttractorKind {
    Equilibrium,
    LimitCycle,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttractorReport {
    pub kind: AttractorKind,
    pub period: Option<f64>,
    /// Peak-to-trough range of `I` over the tail window.
    pub amplitude: f64,
    /// Largest componentwise distance of the tail from the refined equilibrium,
    /// or from the final state when no endemic equilibrium is available.
    pub deviation: f64,
    pub maxima: usize,
    pub period_spread: Option<f64>,
    pub params: Params,
}

/// Thresholds used by [`detect_attractor`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractorCriteria {
    pub equilibrium_tol: f64,
    pub min_maxima: usize,
    pub max_period_spread: f64,
    pub max_peak_spread: f64,
    /// Minimum `I` amplitude, as a multiple of `epsilon`.
    pub amplitude_factor: f64,
    pub min_tail_points: usize,
}

impl Default for AttractorCriteria {
    fn default() -> Self {
        Self {
            equilibrium_tol: 1e-6,
            min_maxima: 3,
            max_period_spread: 0.01,
            max_peak_spread: 0.01,
            amplitude_factor: 10.0,
            min_tail_points: 10,
        }
    }
}

/// Classify the tail of a full-system run with the default criteria.
pub fn detect_attractor(traj: &Trajectory<5>, p: &Params) -> AttractorReport {
    detect_attractor_with(traj, p, &AttractorCriteria::default())
}

pub fn detect_attractor_with(traj: &Trajectory<5>, p: &Params, c: &AttractorCriteria) -> AttractorReport {
    let mut report = AttractorReport {
        kind: AttractorKind::Undecided,
        period: None,
        amplitude: 0.0,
        deviation: f64::INFINITY,
        maxima: 0,
        period_spread: None,
        params: *p,
    };
    if traj.is_empty() {
        return report;
    }
    let t_first = traj.times[0];
    let t_last = traj.times[traj.len() - 1];
    let start = traj.tail_start.unwrap_or(t_last - crate::integrate::TAIL_FRACTION * (t_last - t_first));
    let idx0 = traj.times.partition_point(|&t| t < start);
    let times = &traj.times[idx0..];
    let states = &traj.states[idx0..];
    if times.len() < c.min_tail_points {
        return report;
    }

    let i_vals: Vec<f64> = states.iter().map(|s| s[1]).collect();
    let i_max = i_vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let i_min = i_vals.iter().copied().fold(f64::INFINITY, f64::min);
    report.amplitude = i_max - i_min;

    let reference = refine_equilibrium(p).map(|e| e.to_array()).unwrap_or(states[states.len() - 1]);
    report.deviation = states
        .iter()
        .map(|s| s.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    if report.deviation < c.equilibrium_tol {
        report.kind = AttractorKind::Equilibrium;
        return report;
    }

    // interior local maxima of I, refined by a parabola through three samples
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for k in 1..i_vals.len() - 1 {
        let (a, b, d) = (i_vals[k - 1], i_vals[k], i_vals[k + 1]);
        if b > a && b >= d {
            let (t0, t1, t2) = (times[k - 1], times[k], times[k + 1]);
            let denom = (t0 - t1) * (t0 - t2) * (t1 - t2);
            let qa = (t2 * (b - a) + t1 * (a - d) + t0 * (d - b)) / denom;
            let qb = (t2 * t2 * (a - b) + t1 * t1 * (d - a) + t0 * t0 * (b - d)) / denom;
            let tv = if qa < 0.0 { -qb / (2.0 * qa) } else { t1 };
            let tv = if (t0..=t2).contains(&tv) { tv } else { t1 };
            peaks.push((tv, b));
        }
    }
    // ignore numerical ripples far below the global peak
    let floor = i_min + 0.5 * report.amplitude;
    peaks.retain(|&(_, v)| v > floor);
    report.maxima = peaks.len();
    if peaks.len() < c.min_maxima {
        return report;
    }
    let periods: Vec<f64> = peaks.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let mean = periods.iter().sum::<f64>() / periods.len() as f64;
    let spread = (periods.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - periods.iter().copied().fold(f64::INFINITY, f64::min))
        / mean;
    let heights: Vec<f64> = peaks.iter().map(|x| x.1).collect();
    let h_max = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let h_min = heights.iter().copied().fold(f64::INFINITY, f64::min);
    report.period = Some(mean);
    report.period_spread = Some(spread);
    let regular = spread < c.max_period_spread && (h_max - h_min) / h_max < c.max_peak_spread;
    if regular && mean > 0.0 && report.amplitude > c.amplitude_factor * p.epsilon {
        report.kind = AttractorKind::LimitCycle;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::Regime;

    fn p(beta: f64, n: f64) -> Params {
        Params::unit_gamma(beta, 0.0, n).unwrap()
    }

    #[test]
    fn fast_jump_from_disease_free_point() {
        let q = p(2.0, 4.0);
        let e = pi1_fast(SlowPoint::new(1.0, 4.0), &q).unwrap();
        let s = ((3f64.sqrt() - 1.0) / 2.0).powi(4);
        assert!((e.s - s).abs() < 1e-12);
        assert!((e.ss - 4.0 * s.powf(1.5)).abs() < 1e-12);
        let on_line = SlowPoint::new(0.5, geometry(&q).l_line(0.5));
        assert!(pi1_fast(on_line, &q).is_err());
    }

    #[test]
    fn layer_landing_agrees_with_root() {
        let q = p(1.5, 3.0);
        let start = SlowPoint::new(0.95, 3.0 * 0.95 * 0.95);
        let (root, landed) = pi1_fast_verified(start, &q, 1e-3).unwrap();
        assert!((root.s - landed.s).abs() < 1e-2 && (root.ss - landed.ss).abs() < 1e-2);
    }

    #[test]
    fn slow_passage_from_origin() {
        let q = p(2.0, 4.0);
        let x = pi2_slow(SlowPoint::new(0.0, 0.0), &q).unwrap();
        assert!((x.s - 0.7968121300200202).abs() < 1e-9);
        assert!(pi2_slow(SlowPoint::new(0.9, 3.5), &q).is_err());
    }

    #[test]
    fn candidate_cycle_is_a_fixed_point() {
        let q = p(2.0, 4.0);
        let c = find_candidate_cycle(&q, 0.9).unwrap();
        assert!(c.converged);
        let (_, rec) = return_map(c.point, &q, Landing::Exact).unwrap();
        assert!((rec.exit.s - c.point.s).abs() < 1e-7);
        assert!(c.point.s > 0.5 && c.point.s < 1.0);
    }

    #[test]
    fn zero_width_interval_is_undecided() {
        let q = p(2.0, 4.0);
        let img = interval_test(&q, SlowPoint::new(0.8, 2.5), 0.0);
        assert_eq!(img.samples.len(), 1);
        assert_eq!(img.verdict, Verdict::Undecided);
    }

    #[test]
    fn interval_images_sit_on_the_right_sides() {
        let q = p(2.0, 4.0);
        let c = find_candidate_cycle(&q, 0.9).unwrap();
        let img = interval_test(&q, c.point, INTERVAL_WIDTH);
        let g = geometry(&q);
        assert_eq!(img.failures(), 0);
        assert!(img.j2().all(|x| x.ss < g.l_line(x.s)));
        assert!(img.j3().all(|x| x.ss > g.l_line(x.s)));
    }

    fn constant_trajectory(x: [f64; 5]) -> Trajectory<5> {
        Trajectory {
            times: (0..50).map(f64::from).collect(),
            states: alloc::vec![x; 50],
            regime: Regime::Full,
            events: Vec::new(),
            termination: Termination::Completed,
            labels: Vec::new(),
            tail_start: None,
            steps_accepted: 49,
            steps_rejected: 0,
        }
    }

    #[test]
    fn constant_trajectory_at_equilibrium() {
        let q = Params::unit_gamma(12.0, 0.01, 4.0).unwrap();
        let eq = refine_equilibrium(&q).unwrap();
        let r = detect_attractor(&constant_trajectory(eq.to_array()), &q);
        assert_eq!(r.kind, AttractorKind::Equilibrium);
        assert_eq!(r.deviation, 0.0);
    }

    #[test]
    fn short_tail_is_undecided() {
        let q = Params::unit_gamma(12.0, 0.01, 4.0).unwrap();
        let mut tr = constant_trajectory([0.5, 0.1, 1.0, 0.1, 0.1]);
        tr.times.truncate(3);
        tr.states.truncate(3);
        assert_eq!(detect_attractor(&tr, &q).kind, AttractorKind::Undecided);
    }

    #[test]
    fn sampled_sine_is_a_cycle() {
        let q = Params::unit_gamma(2.0, 0.01, 4.0).unwrap();
        let times: Vec<f64> = (0..4000).map(|k| k as f64 * 0.05).collect();
        let states = times.iter().map(|t| [0.4, 0.2 + 0.1 * (t * 0.7).sin(), 1.0, 0.1, 0.1]).collect();
        let tr = Trajectory { times, states, ..constant_trajectory([0.0; 5]) };
        let r = detect_attractor_with(&tr, &q, &AttractorCriteria { min_tail_points: 5, ..Default::default() });
        assert_eq!(r.kind, AttractorKind::LimitCycle);
        let period = r.period.unwrap();
        assert!((period - 2.0 * core::f64::consts::PI / 0.7).abs() < 1e-2);
    }
}
