//! Endemic equilibrium, its spectrum, and Hopf points of the reduced system.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::integrate::{integrate_reduced, IntegrationConfig};
use crate::linalg;
use crate::model::{endemic_equilibrium_series, reduced_field, Params, ReducedState};

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
/// Flow time used to re-seed Newton when the series seed fails.
pub const RELAX_TIME: f64 = 100.0;
/// Smallest infected density accepted as an endemic equilibrium.
pub const ENDEMIC_FLOOR: f64 = 1e-12;
/// Parameter resolution of Hopf bisection.
pub const HOPF_TOL: f64 = 1e-6;

fn residual(x: &[f64; 5], p: &Params) -> f64 {
    linalg::max_abs(&reduced_field(x, p))
}

/// Newton-refined endemic equilibrium, seeded by the first-order series.
pub fn refine_equilibrium(p: &Params) -> Result<ReducedState> {
    p.validate()?;
    if p.epsilon <= 0.0 {
        return Err(Error::Domain("the endemic equilibrium is isolated only for epsilon > 0".into()));
    }
    let seed = endemic_equilibrium_series(p)?;
    let endemic = |x: [f64; 5]| {
        let state = ReducedState::from_array(x);
        if x[1] > ENDEMIC_FLOOR && x.iter().all(|v| *v >= 0.0) && state.completion_violation(p.n) <= 1e-12 {
            Ok(state)
        } else {
            Err(Error::Inconsistent(format!("Newton converged to a non-endemic state {x:?}")))
        }
    };
    match newton(seed.to_array(), p).and_then(endemic) {
        Ok(state) => Ok(state),
        // the first-order seed can sit outside Newton's basin, near threshold
        // or for large epsilon; relaxing along the flow first brings it back in
        Err(first) => {
            let config = IntegrationConfig::new(RELAX_TIME).sample_every(RELAX_TIME);
            let relaxed = integrate_reduced(p, seed, &config).map_err(|_| first.clone())?;
            newton(relaxed.last().1, p).and_then(endemic).map_err(|_| first)
        }
    }
}

/// Damped Newton iteration on the reduced field from `x0`.
pub fn newton(mut x: [f64; 5], p: &Params) -> Result<[f64; 5]> {
    let mut r = residual(&x, p);
    for _ in 0..NEWTON_MAX_ITER {
        if r <= NEWTON_TOL {
            return Ok(x);
        }
        let j = linalg::jacobian(|y| reduced_field(y, p), &x);
        let f = reduced_field(&x, p);
        let dx = linalg::solve(j, &f)?;
        let mut lambda = 1.0;
        loop {
            let trial: [f64; 5] = core::array::from_fn(|i| x[i] - lambda * dx[i]);
            let rt = residual(&trial, p);
            if rt.is_finite() && (rt < r || lambda < 1e-3) {
                x = trial;
                r = rt;
                break;
            }
            lambda *= 0.5;
        }
    }
    if r <= NEWTON_TOL {
        Ok(x)
    } else {
        Err(Error::NoConvergence { iterations: NEWTON_MAX_ITER, residual: r })
    }
}

/// Eigenvalues of the central-difference Jacobian of the reduced field,
/// sorted by decreasing real part.
pub fn jacobian_spectrum(state: &ReducedState, p: &Params) -> Result<[Complex<f64>; 5]> {
    let x = state.to_array();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("state"));
    }
    linalg::eigenvalues(&linalg::jacobian(|y| reduced_field(y, p), &x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Axis {
    N,
    Beta,
    Epsilon,
}

impl Axis {
    pub fn get(self, p: &Params) -> f64 {
        match self {
            Axis::N => p.n,
            Axis::Beta => p.beta,
            Axis::Epsilon => p.epsilon,
        }
    }

    pub fn set(self, p: &Params, v: f64) -> Params {
        match self {
            Axis::N => p.with_n(v),
            Axis::Beta => p.with_beta(v),
            Axis::Epsilon => p.with_epsilon(v),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::N => "n",
            Axis::Beta => "beta",
            Axis::Epsilon => "epsilon",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CellClass {
    StableEquilibrium,
    /// Unstable endemic equilibrium, the side where cycles are born.
    CycleSide,
    /// `R0 <= 1`: no endemic equilibrium.
    BelowThreshold,
    Failed,
}

impl CellClass {
    pub fn label(self) -> &'static str {
        match self {
            CellClass::StableEquilibrium => "stable-equilibrium",
            CellClass::CycleSide => "limit-cycle-side",
            CellClass::BelowThreshold => "below-threshold",
            CellClass::Failed => "failed",
        }
    }

    fn is_endemic(self) -> bool {
        matches!(self, CellClass::StableEquilibrium | CellClass::CycleSide)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub class: CellClass,
    /// Eigenvalue with the largest real part (zero when undefined).
    pub leading: Complex<f64>,
}

/// Classify parameters by the spectrum at the refined endemic equilibrium.
pub fn classify(p: &Params) -> Classification {
    let zero = Complex::new(0.0, 0.0);
    if p.validate().is_err() || p.beta * (p.n - 2.0) <= p.gamma {
        return Classification { class: CellClass::BelowThreshold, leading: zero };
    }
    let spectrum = refine_equilibrium(p).and_then(|eq| jacobian_spectrum(&eq, p));
    match spectrum {
        Ok(ev) => Classification {
            class: if ev[0].re > 0.0 { CellClass::CycleSide } else { CellClass::StableEquilibrium },
            leading: ev[0],
        },
        Err(_) => Classification { class: CellClass::Failed, leading: zero },
    }
}

/// A parameter point where a complex pair crosses the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HopfPoint {
    pub n: f64,
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub re: f64,
    /// Angular frequency of the critical pair.
    pub im: f64,
    /// Largest real part among the other three eigenvalues.
    pub others_max_re: f64,
}

impl HopfPoint {
    pub fn params(&self) -> Params {
        Params { beta: self.beta, gamma: self.gamma, epsilon: self.epsilon, n: self.n }
    }
}

fn spectrum_at(p: &Params) -> Result<[Complex<f64>; 5]> {
    let eq = refine_equilibrium(p)?;
    jacobian_spectrum(&eq, p)
}

fn nearest(ev: &[Complex<f64>; 5], target: Complex<f64>) -> Complex<f64> {
    let mut best = ev[0];
    for z in ev {
        // compare the conjugate too so the upper member of the pair is kept
        let z = Complex::new(z.re, z.im.abs());
        if (z - target).norm_sqr() < (best - target).norm_sqr() {
            best = z;
        }
    }
    Complex::new(best.re, best.im.abs())
}

fn critical_pair(ev: &[Complex<f64>; 5]) -> Option<Complex<f64>> {
    ev.iter().filter(|z| z.im > 1e-9).max_by(|a, b| a.re.total_cmp(&b.re)).copied()
}

/// Bisect along `axis` between `lo` and `hi` for the parameter where the
/// complex pair of the endemic equilibrium crosses the imaginary axis.
///
/// Returns `None` when the endpoints do not bracket a crossing.
pub fn hopf_bisect(base: &Params, axis: Axis, lo: f64, hi: f64) -> Result<Option<HopfPoint>> {
    let at = |v: f64| axis.set(base, v);
    let (ev_lo, ev_hi) = match (spectrum_at(&at(lo)), spectrum_at(&at(hi))) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return Ok(None),
    };
    let (mut track_lo, mut track_hi) = match (critical_pair(&ev_lo), critical_pair(&ev_hi)) {
        (Some(a), Some(b)) => (a, b),
        (Some(a), None) => (a, nearest(&ev_hi, a)),
        (None, Some(b)) => (nearest(&ev_lo, b), b),
        (None, None) => return Ok(None),
    };
    if track_lo.re.signum() == track_hi.re.signum() {
        return Ok(None);
    }
    let (mut a, mut b) = (lo, hi);
    let mut guard = 0;
    while (b - a).abs() > HOPF_TOL {
        guard += 1;
        if guard > 200 {
            break;
        }
        let mid = 0.5 * (a + b);
        let ev = spectrum_at(&at(mid))?;
        // follow the pair from whichever end is closer in the complex plane
        let z_lo = nearest(&ev, track_lo);
        let z_hi = nearest(&ev, track_hi);
        let z = if (z_lo - track_lo).norm_sqr() <= (z_hi - track_hi).norm_sqr() { z_lo } else { z_hi };
        if z.re.signum() == track_lo.re.signum() {
            a = mid;
            track_lo = z;
        } else {
            b = mid;
            track_hi = z;
        }
    }
    let v = if track_lo.re.abs() <= track_hi.re.abs() { a } else { b };
    let p = at(v);
    let ev = spectrum_at(&p)?;
    let pair = nearest(&ev, if v == a { track_lo } else { track_hi });
    if pair.im <= 1e-9 {
        return Ok(None);
    }
    let others_max_re = ev
        .iter()
        .filter(|z| (z.re - pair.re).abs() > 1e-12 || (z.im.abs() - pair.im).abs() > 1e-9)
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Some(HopfPoint {
        n: p.n,
        beta: p.beta,
        gamma: p.gamma,
        epsilon: p.epsilon,
        re: pair.re,
        im: pair.im,
        others_max_re,
    }))
}

/// Two-parameter slice through parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SliceSpec {
    pub x_axis: Axis,
    pub y_axis: Axis,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Supplies gamma and the value of the third parameter.
    pub base: Params,
    pub resolution: (usize, usize),
}

impl SliceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.x_axis == self.y_axis {
            return Err(Error::InvalidParams("slice axes must differ".into()));
        }
        if self.resolution.0 < 2 || self.resolution.1 < 2 {
            return Err(Error::InvalidParams(format!(
                "slice resolution must be at least 2 per axis, got {:?}",
                self.resolution
            )));
        }
        let ranges = [self.x_range.0, self.x_range.1, self.y_range.0, self.y_range.1];
        if ranges.iter().any(|v| !v.is_finite()) || self.x_range.0 >= self.x_range.1 || self.y_range.0 >= self.y_range.1
        {
            return Err(Error::InvalidParams(format!(
                "slice ranges must be finite and increasing: {:?} x {:?}",
                self.x_range, self.y_range
            )));
        }
        if self.base.gamma.is_nan() || self.base.gamma <= 0.0 {
            return Err(Error::InvalidParams("gamma must be positive".into()));
        }
        Ok(())
    }

    pub fn x_at(&self, i: usize) -> f64 {
        let (a, b) = self.x_range;
        a + (b - a) * i as f64 / (self.resolution.0 - 1) as f64
    }

    pub fn y_at(&self, j: usize) -> f64 {
        let (a, b) = self.y_range;
        a + (b - a) * j as f64 / (self.resolution.1 - 1) as f64
    }

    pub fn params_at(&self, i: usize, j: usize) -> Params {
        let p = self.x_axis.set(&self.base, self.x_at(i));
        self.y_axis.set(&p, self.y_at(j))
    }

    /// All grid parameters in row-major order (`j` outer, `i` inner).
    pub fn grid(&self) -> Vec<Params> {
        let (nx, ny) = self.resolution;
        (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).map(|(i, j)| self.params_at(i, j)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub class: CellClass,
    pub leading: Complex<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub spec: SliceSpec,
    pub cells: Vec<Cell>,
    /// Boundary pieces between stable and cycle-side cells, as `(x, y)` pairs.
    pub segments: Vec<[(f64, f64); 2]>,
    pub hopf_points: Vec<HopfPoint>,
    pub failures: usize,
}

impl SweepGrid {
    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[j * self.spec.resolution.0 + i]
    }

    /// Largest value of `axis` among cycle-side cells and boundary points.
    pub fn max_on_cycle_side(&self, axis: Axis) -> Option<f64> {
        let mut best: Option<f64> = None;
        let mut take = |v: f64| best = Some(best.map_or(v, |b: f64| b.max(v)));
        for c in self.cells.iter().filter(|c| c.class == CellClass::CycleSide) {
            if axis == self.spec.x_axis {
                take(c.x);
            } else if axis == self.spec.y_axis {
                take(c.y);
            }
        }
        for h in &self.hopf_points {
            take(axis.get(&h.params()));
        }
        best
    }
}

/// Classify every grid point sequentially.
pub fn classify_grid(spec: &SliceSpec) -> Vec<Classification> {
    spec.grid().iter().map(classify).collect()
}

/// Sweep a slice: classify cells, then refine the boundary on every grid
/// edge whose endpoints straddle the stability change.
pub fn sweep_slice(spec: &SliceSpec) -> Result<SweepGrid> {
    spec.validate()?;
    let classes = classify_grid(spec);
    assemble_slice(spec, &classes)
}

/// Build the grid from precomputed classifications in row-major order.
pub fn assemble_slice(spec: &SliceSpec, classes: &[Classification]) -> Result<SweepGrid> {
    spec.validate()?;
    let (nx, ny) = spec.resolution;
    if classes.len() != nx * ny {
        return Err(Error::Inconsistent(format!("expected {} classifications, got {}", nx * ny, classes.len())));
    }
    let cells: Vec<Cell> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| {
            let c = classes[j * nx + i];
            Cell { i, j, x: spec.x_at(i), y: spec.y_at(j), class: c.class, leading: c.leading }
        })
        .collect();
    let failures = cells.iter().filter(|c| c.class == CellClass::Failed).count();
    let class = |i: usize, j: usize| cells[j * nx + i].class;

    // crossing point on the edge between two neighbouring grid nodes, if any
    let mut hopf_points = Vec::new();
    let mut crossing = |a: (usize, usize), b: (usize, usize)| -> Option<(f64, f64)> {
        let (ca, cb) = (class(a.0, a.1), class(b.0, b.1));
        if !(ca.is_endemic() && cb.is_endemic() && ca != cb) {
            return None;
        }
        let horizontal = a.1 == b.1;
        let (axis, lo, hi) = if horizontal {
            (spec.x_axis, spec.x_at(a.0), spec.x_at(b.0))
        } else {
            (spec.y_axis, spec.y_at(a.1), spec.y_at(b.1))
        };
        let base = spec.params_at(a.0, a.1);
        let v = match hopf_bisect(&base, axis, lo, hi) {
            Ok(Some(h)) => {
                hopf_points.push(h);
                axis.get(&h.params())
            }
            _ => 0.5 * (lo + hi),
        };
        Some(if horizontal { (v, spec.y_at(a.1)) } else { (spec.x_at(a.0), v) })
    };

    let mut edge_cache: Vec<Option<Option<(f64, f64)>>> = alloc::vec![None; 2 * nx * ny];
    let mut edge = |a: (usize, usize), b: (usize, usize)| -> Option<(f64, f64)> {
        let key = 2 * (a.1 * nx + a.0) + usize::from(a.1 != b.1);
        if edge_cache[key].is_none() {
            edge_cache[key] = Some(crossing(a, b));
        }
        edge_cache[key].unwrap()
    };

    let mut segments = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let pts: Vec<(f64, f64)> = [
                edge((i, j), (i + 1, j)),
                edge((i + 1, j), (i + 1, j + 1)),
                edge((i, j + 1), (i + 1, j + 1)),
                edge((i, j), (i, j + 1)),
            ]
            .into_iter()
            .flatten()
            .collect();
            // two crossings form one segment; four (a saddle square) form two
            for pair in pts.chunks_exact(2) {
                segments.push([pair[0], pair[1]]);
            }
        }
    }

    Ok(SweepGrid { spec: *spec, cells, segments, hopf_points, failures })
}
