use pairsirs_core::fastslow::{constant_of_motion, slow_solution};
use pairsirs_core::integrate::{
    integrate, integrate_layer, integrate_reduced, integrate_slow, Direction, Event, IntegrationConfig, Termination,
};
use pairsirs_core::model::{full_rhs, geometry};
use pairsirs_core::{FullState, Params, ReducedState, SlowPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::physical_state;

#[test]
fn full_system_keeps_edge_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = Params::new(2.0, 1.0, 0.01, 4.0).unwrap();
    let cfg = IntegrationConfig::new(100.0).tolerances(1e-10, 1e-12).sample_every(0.5);
    for _ in 0..20 {
        let start = physical_state(&mut rng, p.n).complete(p.n).to_array();
        let tr = integrate(
            |_, y: &[f64; 8]| full_rhs(&FullState::from_array(*y), &p).map(|d| d.to_array()).unwrap_or([f64::NAN; 8]),
            0.0,
            start,
            &cfg,
        )
        .unwrap();
        for y in &tr.states {
            for r in FullState::from_array(*y).constraint_residuals(p.n) {
                assert!(r.abs() <= 1e-7, "{r}");
            }
        }
    }
}

#[test]
fn critical_manifold_is_invariant_at_positive_epsilon() {
    let p = Params::new(2.0, 1.0, 0.05, 4.0).unwrap();
    let cfg = IntegrationConfig::new(50.0).sample_every(0.5);
    for (s, ss) in [(0.3, 0.2), (0.8, 2.0), (1.0, 4.0), (0.05, 0.01)] {
        let tr = integrate_reduced(&p, ReducedState::new(s, 0.0, ss, 0.0, 0.0), &cfg).unwrap();
        for y in &tr.states {
            assert!(y[1].abs().max(y[3].abs()).max(y[4].abs()) <= 1e-12);
        }
    }
}

#[test]
fn reduced_flow_keeps_the_invariant_region() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let n = rng.random_range(2.5..10.0);
        let p =
            Params::new(rng.random_range(0.1..5.0), rng.random_range(0.2..3.0), rng.random_range(0.0..0.5), n).unwrap();
        let start = physical_state(&mut rng, n);
        assert!(start.delta_violation(n) <= 1e-12 && start.completion_violation(n) <= 1e-12);
        let tr =
            integrate_reduced(&p, start, &IntegrationConfig::new(100.0).tolerances(1e-10, 1e-13).sample_every(0.5))
                .unwrap();
        for y in &tr.states {
            let x = ReducedState::from_array(*y);
            assert!(x.to_array().iter().all(|v| *v >= -1e-9), "{x:?}");
            assert!(x.delta_violation(n) <= 1e-7, "{x:?} from {start:?}");
        }
    }
}

#[test]
fn region_without_recovered_pairs_condition_is_not_invariant() {
    // satisfies every inequality of the region but completes to RR < 0
    let p = Params::new(4.578861756099604, 1.0, 0.1745517322829382, 9.243233646753975).unwrap();
    let start = ReducedState::new(
        0.41770517048847894,
        0.5586249767068874,
        1.1402166455182792,
        1.649730697037006,
        1.9724692793469862,
    );
    assert_eq!(start.delta_violation(p.n), 0.0);
    assert!(start.completion_violation(p.n) > 0.5);
    let tr = integrate_reduced(&p, start, &IntegrationConfig::new(1.0).sample_every(0.25)).unwrap();
    let worst = tr.states.iter().map(|y| ReducedState::from_array(*y).delta_violation(p.n)).fold(0.0, f64::max);
    assert!(worst > 1e-3, "{worst}");
}

#[test]
fn slow_flow_matches_closed_form_and_contracts_onto_the_parabola() {
    let cfg = IntegrationConfig::new(5.0).tolerances(1e-12, 1e-14).sample_every(0.05);
    for (s, ss, n) in [(0.5, 1.0, 4.0), (0.1, 0.0, 3.0), (0.0, 0.0, 4.0), (0.7, 3.5, 6.0)] {
        let entry = SlowPoint::new(s, ss);
        let tr = integrate_slow(n, entry, &cfg).unwrap();
        let d0 = entry.ss - n * entry.s * entry.s;
        for (t, y) in tr.times.iter().zip(&tr.states) {
            let exact = slow_solution(entry, *t, n);
            assert!((y[0] - exact.s).abs() <= 1e-8 && (y[1] - exact.ss).abs() <= 1e-8, "t = {t}");
            let d = exact.ss - n * exact.s * exact.s;
            assert!((d - (-2.0 * t).exp() * d0).abs() <= 1e-12, "t = {t}");
        }
    }
}

#[test]
fn slow_flow_error_shrinks_with_tolerance() {
    let entry = SlowPoint::new(0.2, 0.4);
    let err = |tol: f64| {
        let tr = integrate_slow(4.0, entry, &IntegrationConfig::new(3.0).tolerances(tol, tol * 1e-2)).unwrap();
        let (t, y) = tr.last();
        let e = slow_solution(entry, t, 4.0);
        (y[0] - e.s).abs().max((y[1] - e.ss).abs())
    };
    let coarse = err(1e-6);
    let fine = err(1e-9);
    assert!(fine < coarse, "{fine} vs {coarse}");
}

#[test]
fn alpha_region_is_forward_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = IntegrationConfig::new(8.0).tolerances(1e-11, 1e-13).sample_every(0.02);
    for _ in 0..50 {
        let n = rng.random_range(2.5..20.0);
        let g = geometry(&Params::new(1.0, 1.0, 0.0, n).unwrap());
        let s = rng.random_range(0.0..1.0);
        let entry = SlowPoint::new(s, rng.random_range(0.0..1.0) * g.alpha(s));
        let tr = integrate_slow(n, entry, &cfg).unwrap();
        for y in &tr.states {
            assert!(y[1] <= g.alpha(y[0]) + 1e-9, "{y:?}");
        }
    }
}

#[test]
fn layer_flow_is_monotone_conserves_v_and_clears_infection() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = IntegrationConfig::new(200.0).tolerances(1e-11, 1e-14).sample_every(0.5);
    for _ in 0..20 {
        let n = rng.random_range(3.0..8.0);
        let r0 = rng.random_range(1.5..5.0);
        let p = Params::new(r0 / (n - 2.0), 1.0, 0.0, n).unwrap();
        let delta = rng.random_range(1e-3..1e-2);
        let s = rng.random_range(0.5..1.0);
        let start = ReducedState::new(s - delta, delta, n * (s - delta) * (s - delta), delta, 0.0);
        let tr = integrate_layer(&p, start, &cfg).unwrap();
        let v0 = constant_of_motion(start.s, start.ss, n).unwrap();
        for w in tr.states.windows(2) {
            assert!(w[1][0] <= w[0][0] + 1e-13 && w[1][2] <= w[0][2] + 1e-13);
        }
        let (_, y) = tr.last();
        assert!(y[1].max(y[3]).max(y[4]) <= 1e-8, "{y:?}");
        for y in &tr.states {
            assert!((constant_of_motion(y[0], y[2], n).unwrap() - v0).abs() <= 1e-6);
        }
    }
}

#[test]
fn layer_flow_on_the_manifold_is_constant() {
    let p = Params::new(2.0, 1.0, 0.0, 4.0).unwrap();
    let start = ReducedState::on_critical_manifold(SlowPoint::new(0.6, 1.1));
    let tr = integrate_layer(&p, start, &IntegrationConfig::new(50.0).sample_every(1.0)).unwrap();
    assert!(tr.states.iter().all(|y| *y == start.to_array()));
}

#[test]
fn event_is_located_on_the_threshold() {
    let p = Params::new(2.0, 1.0, 0.0, 4.0).unwrap();
    let eps = 0.01;
    let cfg = IntegrationConfig::new(100.0).with_event(Event::threshold(1, eps, Direction::Rising, true));
    let start = ReducedState::new(0.999, 0.001, 4.0 * 0.999 * 0.999 - 0.001, 0.001, 0.0);
    let tr = integrate_layer(&p, start, &cfg).unwrap();
    assert_eq!(tr.termination, Termination::Event);
    assert!((tr.last().1[1] - eps).abs() <= 1e-10);
}
