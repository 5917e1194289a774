use pairsirs_core::ReducedState;
use rand::Rng;

/// Random state whose completed edge densities are all non-negative.
///
/// Starts from the well-mixed pairing `n x_a x_b` blended with the fully
/// assortative one, then applies mass-preserving swaps between a mixed pair
/// and the two matching like pairs.
pub fn physical_state<R: Rng>(rng: &mut R, n: f64) -> ReducedState {
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
