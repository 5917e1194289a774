//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exits 0 after reporting so the rest of a workspace test run still executes.
//! Set `ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.

use std::time::{Duration, Instant};

use pairsirs::{ensemble_parallel, interval_parallel, sweep_parallel};
use pairsirs_core::bifurcation::{hopf_bisect, Axis, CellClass, SliceSpec, SweepGrid};
use pairsirs_core::fastslow::{
    constant_of_motion, entry_root_h, exit_time, exit_time_checked, exit_time_quadrature, parabola_exit, slow_solution,
};
use pairsirs_core::integrate::{
    integrate, integrate_full_stiff, integrate_layer, integrate_reduced, integrate_slow, IntegrationConfig,
};
use pairsirs_core::model::{full_rhs, geometry, lambda5, r1_closed, r1_limit, r1_ngm};
use pairsirs_core::netsim::{compare_to_ode, generate_regular_graph, random_nodes};
use pairsirs_core::singular::{
    detect_attractor, find_candidate_cycle, pi1_fast_verified, AttractorKind, Verdict, INTERVAL_SAMPLES, INTERVAL_WIDTH,
};
use pairsirs_core::{FullState, Params, ReducedState, SlowPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

struct Report {
    failed: Vec<&'static str>,
}

impl Report {
    fn check(&mut self, id: &'static str, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= budget;
        let pass = ok && in_time;
        let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), budget.as_secs());
        let timing = if in_time { timing } else { format!("{timing}, over budget") };
        println!("{} {id} {name}: {detail} [{timing}]", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn unit(beta: f64, epsilon: f64, n: f64) -> Params {
    Params::unit_gamma(beta, epsilon, n).expect("valid parameters")
}

/// Random state whose completed edge densities are all non-negative.
fn physical_state(rng: &mut ChaCha8Rng, n: f64) -> ReducedState {
    let s: f64 = rng.random_range(0.02..0.98);
    let i = rng.random_range(0.0..1.0) * (1.0 - s);
    let x = [s, i, 1.0 - s - i];
    let theta = rng.random_range(0.0..1.0);
    let mut e = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            e[a][b] = n * (1.0 - theta) * x[a] * x[b];
        }
        e[a][a] += n * theta * x[a];
    }
    for _ in 0..4 {
        let a = rng.random_range(0..3);
        let b = (a + rng.random_range(1..3)) % 3;
        let lo = -e[a][b];
        let hi = e[a][a].min(e[b][b]);
        let d = lo + rng.random_range(0.0..1.0) * (hi - lo);
        e[a][b] += d;
        e[b][a] += d;
        e[a][a] -= d;
        e[b][b] -= d;
    }
    let c = |v: f64| v.max(0.0);
    ReducedState::new(s, i, c(e[0][0]), c(e[0][1]), c(e[1][1]))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn ngm_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = Params::new(
            rng.random_range(0.05..10.0),
            rng.random_range(0.1..5.0),
            rng.random_range(0.0..1.0),
            rng.random_range(2.2..40.0),
        )
        .map_err(err)?;
        let (a, b) = (r1_ngm(&p).map_err(err)?, r1_closed(&p).map_err(err)?);
        worst = worst.max((a - b).abs() / b.max(1.0));
    }
    Ok((worst <= 1e-10, format!("max relative gap {worst:.2e} over 100 sets")))
}

fn conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = unit(2.0, 0.01, 4.0);
    let cfg = IntegrationConfig::new(100.0).tolerances(1e-10, 1e-12).sample_every(0.5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let start = physical_state(&mut rng, p.n).complete(p.n).to_array();
        let field = |_: f64, y: &[f64; 8]| {
            full_rhs(&FullState::from_array(*y), &p).map(|d| d.to_array()).unwrap_or([f64::NAN; 8])
        };
        let tr = integrate(field, 0.0, start, &cfg).map_err(err)?;
        for y in &tr.states {
            for r in FullState::from_array(*y).constraint_residuals(p.n) {
                worst = worst.max(r.abs());
            }
        }
    }
    Ok((worst <= 1e-7, format!("max edge-sum residual {worst:.2e} over 20 starts")))
}

fn manifold_invariance() -> Outcome {
    let p = unit(2.0, 0.05, 4.0);
    let cfg = IntegrationConfig::new(50.0).sample_every(0.1);
    let mut worst: f64 = 0.0;
    for (s, ss) in [(0.3, 0.2), (0.8, 2.0), (1.0, 4.0), (0.05, 0.01), (0.6, 1.4)] {
        let tr = integrate_reduced(&p, ReducedState::new(s, 0.0, ss, 0.0, 0.0), &cfg).map_err(err)?;
        for y in &tr.states {
            worst = worst.max(y[1].abs()).max(y[3].abs()).max(y[4].abs());
        }
    }
    Ok((worst <= 1e-12, format!("max |I|, |SI|, |II| = {worst:.2e}")))
}

fn slow_flow_exactness() -> Outcome {
    let cfg = IntegrationConfig::new(5.0).tolerances(1e-12, 1e-14).sample_every(0.05);
    let (mut flow_gap, mut decay_gap): (f64, f64) = (0.0, 0.0);
    for (s, ss, n) in [(0.5, 1.0, 4.0), (0.1, 0.0, 3.0), (0.0, 0.0, 4.0), (0.7, 3.5, 6.0), (0.9, 0.2, 50.0)] {
        let entry = SlowPoint::new(s, ss);
        let tr = integrate_slow(n, entry, &cfg).map_err(err)?;
        let d0 = ss - n * s * s;
        for (t, y) in tr.times.iter().zip(&tr.states) {
            let exact = slow_solution(entry, *t, n);
            flow_gap = flow_gap.max((y[0] - exact.s).abs()).max((y[1] - exact.ss).abs());
            let d = exact.ss - n * exact.s * exact.s;
            decay_gap = decay_gap.max((d - (-2.0 * t).exp() * d0).abs());
        }
    }
    Ok((
        flow_gap <= 1e-8 && decay_gap <= 1e-12,
        format!("numeric vs closed form {flow_gap:.2e}, parabola distance decay error {decay_gap:.2e}"),
    ))
}

fn entry_roots() -> Outcome {
    let root = entry_root_h(1.0, 4.0, &unit(2.0, 0.0, 4.0)).map_err(err)?;
    let u = (3f64.sqrt() - 1.0) / 2.0;
    let root_gap = (root - u.powi(4)).abs();
    let mut landing_gap: f64 = 0.0;
    for n in [3.0, 5.0, 50.0] {
        let (a, b) = pi1_fast_verified(SlowPoint::new(1.0, n), &unit(1.5, 0.0, n), 1e-3).map_err(err)?;
        landing_gap = landing_gap.max((a.s - b.s).abs()).max((a.ss - b.ss).abs());
    }
    Ok((
        root_gap <= 1e-10 && landing_gap <= 1e-2,
        format!("root error {root_gap:.2e}, max root vs layer landing gap {landing_gap:.2e}"),
    ))
}

fn entry_exit() -> Outcome {
    let p = unit(2.0, 0.0, 4.0);
    let exit = parabola_exit(0.0, &p).map_err(err)?;
    let te = exit_time(SlowPoint::new(0.0, 0.0), &p).map_err(err)?.exit_time;
    let l = geometry(&p).l_slope();
    let mut quad_gap: f64 = 0.0;
    for k in 0..10 {
        let s = 0.02 + 0.05 * k as f64;
        let entry = SlowPoint::new(s, (0.3 + 0.05 * k as f64) * l * s);
        let closed = exit_time_checked(entry, &p, false).map_err(err)?.exit_time;
        quad_gap = quad_gap.max((closed - exit_time_quadrature(entry, &p).map_err(err)?).abs());
    }
    let knee = 1.0 / r1_limit(&p).map_err(err)?;
    let exits: Vec<f64> = (0..100)
        .map(|k| parabola_exit(knee * k as f64 / 100.0, &p).map(|q| q.s))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let decreasing = exits.windows(2).all(|w| w[1] < w[0]);
    let ok = (exit.s - 0.7968).abs() < 1e-4 && (te - 1.5936).abs() < 1e-4 && quad_gap <= 1e-8 && decreasing;
    Ok((
        ok,
        format!(
            "exit from origin {:.6}, T_E {te:.6}, closed form vs quadrature {quad_gap:.2e}, exit map decreasing: {decreasing}",
            exit.s
        ),
    ))
}

fn full_run(beta: f64) -> Result<AttractorKind, String> {
    let p = unit(beta, 0.01, 4.0);
    let (s, i) = (0.99, 0.01);
    let start = ReducedState::new(s, i, 4.0 * s * s, 4.0 * s * i, 4.0 * i * i);
    let tr = integrate_full_stiff(&p, start, &IntegrationConfig::new(3000.0).sample_every(0.1)).map_err(err)?;
    let report = detect_attractor(&tr, &p);
    Ok(report.kind)
}

fn singular_vs_full() -> Outcome {
    let verdict = |beta: f64| -> Result<Verdict, String> {
        let p = unit(beta, 0.0, 4.0);
        let cycle = find_candidate_cycle(&p, 0.9).map_err(err)?;
        Ok(interval_parallel(&p, cycle.point, INTERVAL_WIDTH, INTERVAL_SAMPLES).verdict)
    };
    let (v2, v12) = (verdict(2.0)?, verdict(1.2)?);
    let (k2, k12) = (full_run(2.0)?, full_run(1.2)?);
    let ok = v2 == Verdict::Transversal
        && v12 == Verdict::NoIntersection
        && k2 == AttractorKind::LimitCycle
        && k12 == AttractorKind::Equilibrium;
    Ok((
        ok,
        format!("interval test beta=2 {v2:?}, beta=1.2 {v12:?}; full system eps=0.01 beta=2 {k2:?}, beta=1.2 {k12:?}"),
    ))
}

fn beta_eps_slice(n: f64) -> SliceSpec {
    SliceSpec {
        x_axis: Axis::Beta,
        y_axis: Axis::Epsilon,
        x_range: (0.0, 15.0),
        y_range: (1e-3, 0.25),
        base: unit(2.0, 0.01, n),
        resolution: (100, 100),
    }
}

fn hopf_in_beta_window() -> Outcome {
    let base = unit(2.0, 0.01, 4.0);
    let (lo, hi) = (1.2, 2.0);
    let mut found = Vec::new();
    for k in 0..40 {
        let a = lo + (hi - lo) * k as f64 / 40.0;
        let b = lo + (hi - lo) * (k + 1) as f64 / 40.0;
        if let Some(h) = hopf_bisect(&base, Axis::Beta, a, b).map_err(err)? {
            found.push(h.beta);
        }
    }
    // where the boundary actually is along this line
    let mut elsewhere = Vec::new();
    for k in 0..300 {
        let (a, b) = (0.3 + 0.05 * k as f64, 0.35 + 0.05 * k as f64);
        if let Some(h) = hopf_bisect(&base, Axis::Beta, a, b).map_err(err)? {
            elsewhere.push(format!("{:.3}", h.beta));
        }
    }
    Ok((
        !found.is_empty(),
        format!("Hopf points in (1.2, 2): {found:?}; along beta in (0.3, 15.3): [{}]", elsewhere.join(", ")),
    ))
}

fn degree_six_has_no_hopf() -> Outcome {
    let grid = sweep_parallel(&beta_eps_slice(6.0)).map_err(err)?;
    let cycle = grid.cells.iter().filter(|c| c.class == CellClass::CycleSide).count();
    Ok((
        grid.hopf_points.is_empty() && cycle == 0,
        format!("{} Hopf points, {cycle} cycle-side cells, {} failed cells", grid.hopf_points.len(), grid.failures),
    ))
}

fn slice_extent(grid: &SweepGrid) -> f64 {
    let from_points = grid.hopf_points.iter().map(|h| h.epsilon).fold(f64::NAN, f64::max);
    from_points.max(grid.max_on_cycle_side(Axis::Epsilon).unwrap_or(f64::NAN))
}

fn largest_hopf_epsilon() -> Outcome {
    let mut parts = Vec::new();
    let mut star = f64::NAN;
    for n in [3.0, 4.0, 5.0] {
        let start = Instant::now();
        let grid = sweep_parallel(&beta_eps_slice(n)).map_err(err)?;
        let e = slice_extent(&grid);
        let t = start.elapsed();
        if t > secs(300) {
            return Ok((false, format!("slice n={n} took {:.1}s", t.as_secs_f64())));
        }
        parts.push(format!("n={n}: {e:.4} ({} failed cells, {:.1}s)", grid.failures, t.as_secs_f64()));
        star = star.max(e);
    }
    Ok(((star - 0.18).abs() <= 0.03, format!("eps* = {star:.4}; {}", parts.join(", "))))
}

fn stochastic_validation() -> Outcome {
    let p = unit(2.0, 0.0, 4.0);
    let nodes = 10_000;
    let graph = generate_regular_graph(nodes, 4, 1).map_err(err)?;
    let infected = random_nodes(nodes, nodes / 100, 2);
    let records = ensemble_parallel(&graph, &p, &infected, 30.0, 0.1, 3, 50).map_err(err)?;
    let identity = records.iter().map(|r| r.identity_violation()).max().unwrap_or(0);
    let report = compare_to_ode(&records, &p).map_err(err)?;
    Ok((
        report.peak_time_rel_error <= 0.15 && identity == 0,
        format!(
            "peak time {:.3} vs ODE {:.3}, relative error {:.3} (tolerance 0.15), edge identity violations {identity}",
            report.peak_time_sim, report.peak_time_ode, report.peak_time_rel_error
        ),
    ))
}

fn property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut problems = Vec::new();

    let mut delta_worst: f64 = 0.0;
    let mut negative_worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(2.5..10.0);
        let p = Params::new(rng.random_range(0.1..5.0), rng.random_range(0.2..3.0), rng.random_range(0.0..0.5), n)
            .map_err(err)?;
        let start = physical_state(&mut rng, n);
        let cfg = IntegrationConfig::new(100.0).tolerances(1e-10, 1e-13).sample_every(0.5);
        for y in &integrate_reduced(&p, start, &cfg).map_err(err)?.states {
            let x = ReducedState::from_array(*y);
            delta_worst = delta_worst.max(x.delta_violation(n));
            negative_worst = negative_worst.max(y.iter().fold(0.0, |m: f64, v| m.max(-v)));
        }
    }
    if delta_worst > 1e-7 || negative_worst > 1e-9 {
        problems.push("invariant region");
    }

    let (mut monotone, mut v_drift, mut tail): (bool, f64, f64) = (true, 0.0, 0.0);
    for _ in 0..20 {
        let n = rng.random_range(3.0..8.0);
        let p = Params::new(rng.random_range(1.5..5.0) / (n - 2.0), 1.0, 0.0, n).map_err(err)?;
        let delta = rng.random_range(1e-3..1e-2);
        let s = rng.random_range(0.5..1.0);
        let start = ReducedState::new(s - delta, delta, n * (s - delta) * (s - delta), delta, 0.0);
        let cfg = IntegrationConfig::new(200.0).tolerances(1e-11, 1e-14).sample_every(0.5);
        let tr = integrate_layer(&p, start, &cfg).map_err(err)?;
        monotone &= tr.states.windows(2).all(|w| w[1][0] <= w[0][0] + 1e-13 && w[1][2] <= w[0][2] + 1e-13);
        let v0 = constant_of_motion(start.s, start.ss, n).map_err(err)?;
        for y in &tr.states {
            v_drift = v_drift.max((constant_of_motion(y[0], y[2], n).map_err(err)? - v0).abs());
        }
        let (_, y) = tr.last();
        tail = tail.max(y[1]).max(y[3]).max(y[4]);
    }
    if !monotone {
        problems.push("layer monotonicity");
    }
    if v_drift > 1e-6 {
        problems.push("constant of motion");
    }
    if tail > 1e-8 {
        problems.push("infected tail");
    }

    let mut alpha_worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let n = rng.random_range(2.5..20.0);
        let g = geometry(&Params::new(1.0, 1.0, 0.0, n).map_err(err)?);
        let s = rng.random_range(0.0..1.0);
        let entry = SlowPoint::new(s, rng.random_range(0.0..1.0) * g.alpha(s));
        let cfg = IntegrationConfig::new(8.0).tolerances(1e-11, 1e-13).sample_every(0.02);
        for y in &integrate_slow(n, entry, &cfg).map_err(err)?.states {
            alpha_worst = alpha_worst.max(y[1] - g.alpha(y[0]));
        }
    }
    if alpha_worst > 1e-9 {
        problems.push("alpha region");
    }

    let mut sign_mismatch = 0;
    for _ in 0..1000 {
        let p = Params::new(rng.random_range(0.05..10.0), rng.random_range(0.1..5.0), 0.0, rng.random_range(2.2..40.0))
            .map_err(err)?;
        let s = rng.random_range(0.01..1.0);
        let point = SlowPoint::new(s, rng.random_range(0.0..1.0) * p.n * s);
        let gap = point.ss - geometry(&p).l_line(s);
        if gap.abs() > 1e-9 && (lambda5(point, &p) > 0.0) != (gap > 0.0) {
            sign_mismatch += 1;
        }
    }
    if sign_mismatch > 0 {
        problems.push("lambda5 sign");
    }

    Ok((
        problems.is_empty(),
        format!(
            "region violation {delta_worst:.1e}, worst negative {negative_worst:.1e}, layer monotone {monotone}, \
             V drift {v_drift:.1e}, infected tail {tail:.1e}, alpha excess {alpha_worst:.1e}, \
             lambda5 sign mismatches {sign_mismatch}{}",
            if problems.is_empty() { String::new() } else { format!("; failing: {}", problems.join(", ")) }
        ),
    ))
}

/// Not a criterion: the same extent for non-integer degrees just above 2.
fn real_degree_extent() {
    let parts: Vec<String> = [2.1, 2.2, 2.28, 2.4, 2.6]
        .iter()
        .map(|&n| match sweep_parallel(&beta_eps_slice(n)) {
            Ok(grid) => format!("n={n}: {:.4}", slice_extent(&grid)),
            Err(e) => format!("n={n}: error {e}"),
        })
        .collect();
    println!("INFO C8c largest Hopf eps for non-integer n: {}", parts.join(", "));
}

fn main() {
    let mut report = Report { failed: Vec::new() };
    report.check("C1", "NGM spectral radius equals closed form", secs(1), ngm_equivalence);
    report.check("C2", "edge sums conserved by the full system", secs(10), conservation);
    report.check("C3", "critical manifold invariant at eps=0.05", secs(10), manifold_invariance);
    report.check("C4", "slow flow closed form and parabola contraction", secs(10), slow_flow_exactness);
    report.check("C5", "entry roots and layer landings", secs(10), entry_roots);
    report.check("C6", "entry-exit consistency", secs(10), entry_exit);
    report.check("C7", "interval test and full-system attractors", secs(120), singular_vs_full);
    report.check("C8a", "Hopf point for beta in (1.2, 2) at n=4, eps=0.01", secs(300), hopf_in_beta_window);
    report.check("C8b", "no Hopf points at n=6", secs(300), degree_six_has_no_hopf);
    report.check("C8c", "largest Hopf eps over n in {3,4,5} is 0.18 +- 0.03", secs(900), largest_hopf_epsilon);
    real_degree_extent();
    report.check("C9", "network peak timing within 15% of the ODE", secs(120), stochastic_validation);
    report.check("C10", "randomised property suite", secs(60), property_suite);

    let total = 12;
    if report.failed.is_empty() {
        println!("acceptance: {total}/{total} passed");
    } else {
        println!("acceptance: {}/{total} passed; failing: {}", total - report.failed.len(), report.failed.join(", "));
        if std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
