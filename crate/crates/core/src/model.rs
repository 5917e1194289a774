//! Pair-approximation SIRS model on an `n`-regular network.
//!
//! Node densities are normalised by the population size, edge counts by the
//! same factor, so edge components live in `[0, n]`. Within-state edges
//! (`SS`, `II`, `RR`) are counted from both endpoints.

use alloc::format;
use nalgebra::Matrix3;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{ensure_finite, Error, Result};

/// Ratios `SI/S`, `SS/S`, `SR/S` are clamped to `[0, n]` once `S` drops below this.
pub const RATIO_FLOOR: f64 = 1e-12;

/// Componentwise tolerance accepted by [`ReducedState::check_delta`].
pub const DELTA_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Params {
    /// Infection rate per SI edge.
    pub beta: f64,
    /// Recovery rate.
    pub gamma: f64,
    /// Waning-immunity rate.
    pub epsilon: f64,
    /// Node degree. Real-valued so that sweeps can treat it as a continuous
    /// parameter; network simulation requires an integer.
    pub n: f64,
}

impl Params {
    pub fn new(beta: f64, gamma: f64, epsilon: f64, n: f64) -> Result<Self> {
        let p = Self { beta, gamma, epsilon, n };
        p.validate()?;
        Ok(p)
    }

    /// Preset with `gamma = 1`, the time unit used throughout the analysis.
    pub fn unit_gamma(beta: f64, epsilon: f64, n: f64) -> Result<Self> {
        Self::new(beta, 1.0, epsilon, n)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite(&[self.beta, self.gamma, self.epsilon, self.n], "parameters")?;
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParams(format!("gamma must be positive, got {}", self.gamma)));
        }
        if self.beta < 0.0 || self.epsilon < 0.0 {
            return Err(Error::InvalidParams(format!(
                "rates must be non-negative (beta = {}, epsilon = {})",
                self.beta, self.epsilon
            )));
        }
        if self.n <= 2.0 {
            return Err(Error::InvalidParams(format!("degree must exceed 2, got {}", self.n)));
        }
        Ok(())
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    pub fn with_n(self, n: f64) -> Self {
        Self { n, ..self }
    }

    /// `(n - 1) / n`, the prefactor of the triple closure.
    #[inline]
    pub fn closure_factor(&self) -> f64 {
        (self.n - 1.0) / self.n
    }

    /// True when the disease-free state is unstable.
    pub fn is_endemic(&self) -> bool {
        r0(self).map(|r| r > 1.0).unwrap_or(false)
    }

    /// True when waning is slower than both fast rates.
    pub fn is_fast_slow(&self) -> bool {
        self.epsilon < self.beta.min(self.gamma)
    }

    /// Integer degree, for the network simulation.
    pub fn degree(&self) -> Result<usize> {
        if self.n.fract() != 0.0 || self.n < 3.0 {
            return Err(Error::InvalidParams(format!("degree must be an integer >= 3, got {}", self.n)));
        }
        Ok(self.n as usize)
    }
}

/// All eight node and edge densities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FullState {
    pub s: f64,
    pub i: f64,
    pub ss: f64,
    pub si: f64,
    pub sr: f64,
    pub ii: f64,
    pub ir: f64,
    pub rr: f64,
}

impl FullState {
    pub const COMPONENTS: [&'static str; 8] = ["S", "I", "SS", "SI", "SR", "II", "IR", "RR"];

    pub fn disease_free(n: f64) -> Self {
        Self { s: 1.0, ss: n, ..Self::default() }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [self.s, self.i, self.ss, self.si, self.sr, self.ii, self.ir, self.rr]
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        Self { s: a[0], i: a[1], ss: a[2], si: a[3], sr: a[4], ii: a[5], ir: a[6], rr: a[7] }
    }

    pub fn recovered(&self) -> f64 {
        1.0 - self.s - self.i
    }

    /// Residuals of the three edge-sum identities, in the order S, I, R.
    pub fn constraint_residuals(&self, n: f64) -> [f64; 3] {
        [
            self.ss + self.si + self.sr - n * self.s,
            self.si + self.ii + self.ir - n * self.i,
            self.sr + self.ir + self.rr - n * self.recovered(),
        ]
    }

    pub fn reduce(&self) -> ReducedState {
        ReducedState { s: self.s, i: self.i, ss: self.ss, si: self.si, ii: self.ii }
    }
}

/// The five coordinates kept after eliminating `SR`, `IR`, `RR` through the
/// edge-sum identities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReducedState {
    pub s: f64,
    pub i: f64,
    pub ss: f64,
    pub si: f64,
    pub ii: f64,
}

impl ReducedState {
    pub const COMPONENTS: [&'static str; 5] = ["S", "I", "SS", "SI", "II"];

    pub fn new(s: f64, i: f64, ss: f64, si: f64, ii: f64) -> Self {
        Self { s, i, ss, si, ii }
    }

    pub fn disease_free(n: f64) -> Self {
        Self { s: 1.0, ss: n, ..Self::default() }
    }

    /// A point of the critical manifold `I = SI = II = 0`.
    pub fn on_critical_manifold(point: SlowPoint) -> Self {
        Self { s: point.s, ss: point.ss, ..Self::default() }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.s, self.i, self.ss, self.si, self.ii]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self { s: a[0], i: a[1], ss: a[2], si: a[3], ii: a[4] }
    }

    pub fn slow_point(&self) -> SlowPoint {
        SlowPoint { s: self.s, ss: self.ss }
    }

    /// Recover `SR`, `IR`, `RR` from the edge-sum identities.
    pub fn complete(&self, n: f64) -> FullState {
        let sr = n * self.s - self.ss - self.si;
        let ir = n * self.i - self.si - self.ii;
        let rr = n * (1.0 - self.s - self.i) - sr - ir;
        FullState { s: self.s, i: self.i, ss: self.ss, si: self.si, sr, ii: self.ii, ir, rr }
    }

    /// Largest violation of the inequalities defining the invariant region
    /// (zero when the state is inside).
    pub fn delta_violation(&self, n: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for v in self.to_array() {
            worst = worst.max(-v);
        }
        worst = worst.max(self.s + self.i - 1.0);
        worst = worst.max(-(self.ss + self.si));
        worst = worst.max(self.ss + self.si - n * self.s);
        worst = worst.max(-(self.si + self.ii));
        worst = worst.max(self.si + self.ii - n * self.i);
        worst
    }

    /// Largest negativity among the eliminated densities `SR`, `IR`, `RR`.
    /// The invariant region alone does not rule these out, and starts with a
    /// negative `RR` can leave the region.
    pub fn completion_violation(&self, n: f64) -> f64 {
        let f = self.complete(n);
        [f.sr, f.ir, f.rr].iter().fold(0.0, |m: f64, v| m.max(-v))
    }

    pub fn in_delta(&self, n: f64, tol: f64) -> bool {
        self.delta_violation(n) <= tol
    }

    pub fn check_delta(&self, n: f64) -> Result<()> {
        ensure_finite(&self.to_array(), "reduced state")?;
        let v = self.delta_violation(n);
        if v > DELTA_TOL {
            return Err(Error::Domain(format!("state {self:?} violates the invariant region by {v:e}")));
        }
        Ok(())
    }
}

/// A point `(S, SS)` on the critical manifold.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SlowPoint {
    pub s: f64,
    pub ss: f64,
}

impl SlowPoint {
    pub const COMPONENTS: [&'static str; 2] = ["S", "SS"];

    pub fn new(s: f64, ss: f64) -> Self {
        Self { s, ss }
    }

    /// The point of the parabola `SS = n S^2` above `s`.
    pub fn on_parabola(s: f64, n: f64) -> Self {
        Self { s, ss: n * s * s }
    }

    pub fn to_array(&self) -> [f64; 2] {
        [self.s, self.ss]
    }
}

/// Linearisation of the reduced system on the critical manifold.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenData {
    /// `[0, 0, -gamma, -2 gamma, lambda5]`.
    pub lambda: [f64; 5],
}

impl EigenData {
    pub fn lambda5(&self) -> f64 {
        self.lambda[4]
    }
}

/// Pair-to-node ratio such as `SI / S`, kept in `[0, n]`.
///
/// Inside the invariant region every ratio already lies in `[0, n]`. The
/// clamp matters just outside it: an explicit step can leave the infected
/// densities at `-1e-16`, and the unclamped field is unstable there.
#[inline]
pub(crate) fn bounded_ratio(num: f64, s: f64, n: f64) -> f64 {
    if num <= 0.0 {
        0.0
    } else {
        (num / s.max(f64::MIN_POSITIVE)).min(n)
    }
}

/// Right-hand side of the full eight-dimensional system.
pub fn full_rhs(state: &FullState, p: &Params) -> Result<FullState> {
    ensure_finite(&state.to_array(), "full state")?;
    let Params { beta, gamma, epsilon: eps, n } = *p;
    let k = p.closure_factor();
    let FullState { s, i, ss, si, sr, ii, ir, rr } = *state;
    let u = bounded_ratio(si, s, n);
    let v = bounded_ratio(ss, s, n);
    let w = bounded_ratio(sr, s, n);
    Ok(FullState {
        s: -beta * si + eps * (1.0 - s - i),
        i: beta * si - gamma * i,
        ss: 2.0 * eps * sr - 2.0 * beta * k * ss * u,
        si: -(gamma + beta) * si + eps * ir + beta * k * si * (v - u),
        sr: gamma * si - eps * sr + eps * rr - beta * k * si * w,
        ii: 2.0 * beta * si - 2.0 * gamma * ii + 2.0 * beta * k * si * u,
        ir: gamma * ii - (gamma + eps) * ir + beta * k * si * w,
        rr: 2.0 * gamma * ir - 2.0 * eps * rr,
    })
}

/// Unchecked reduced vector field, used inside the integrators.
#[inline]
pub fn reduced_field(x: &[f64; 5], p: &Params) -> [f64; 5] {
    let Params { beta, gamma, epsilon: eps, n } = *p;
    let k = p.closure_factor();
    let [s, i, ss, si, ii] = *x;
    let u = bounded_ratio(si, s, n);
    let v = bounded_ratio(ss, s, n);
    [
        -beta * si + eps * (1.0 - s - i),
        beta * si - gamma * i,
        2.0 * eps * (n * s - ss - si) - 2.0 * beta * k * ss * u,
        -(gamma + beta) * si + eps * (n * i - si - ii) + beta * k * si * (v - u),
        2.0 * beta * si - 2.0 * gamma * ii + 2.0 * beta * k * si * u,
    ]
}

/// Fast limit (`epsilon = 0`) of [`reduced_field`], on the fast time scale.
#[inline]
pub fn layer_field(x: &[f64; 5], p: &Params) -> [f64; 5] {
    let Params { beta, gamma, n, .. } = *p;
    let k = p.closure_factor();
    let [s, i, ss, si, ii] = *x;
    let u = bounded_ratio(si, s, n);
    let v = bounded_ratio(ss, s, n);
    [
        -beta * si,
        beta * si - gamma * i,
        -(2.0 * beta * k * ss * u),
        -(gamma + beta) * si + beta * k * si * (v - u),
        2.0 * beta * si - 2.0 * gamma * ii + 2.0 * beta * k * si * u,
    ]
}

/// Right-hand side of the reduced five-dimensional system.
pub fn reduced_rhs(state: &ReducedState, p: &Params) -> Result<ReducedState> {
    state.check_delta(p.n)?;
    Ok(ReducedState::from_array(reduced_field(&state.to_array(), p)))
}

/// Layer equations: the reduced system with the waning terms removed.
pub fn layer_rhs(state: &ReducedState, p: &Params) -> Result<ReducedState> {
    state.check_delta(p.n)?;
    Ok(ReducedState::from_array(layer_field(&state.to_array(), p)))
}

/// Slow flow on the critical manifold in slow time `tau = epsilon t`.
#[inline]
pub fn slow_field(x: &[f64; 2], n: f64) -> [f64; 2] {
    [1.0 - x[0], 2.0 * (n * x[0] - x[1])]
}

fn require_degree(p: &Params) -> Result<()> {
    if p.n <= 2.0 {
        return Err(Error::InvalidParams(format!("reproduction numbers need n > 2, got {}", p.n)));
    }
    Ok(())
}

/// Basic reproduction number of the fast limit, `beta (n - 2) / gamma`.
pub fn r0(p: &Params) -> Result<f64> {
    require_degree(p)?;
    Ok(p.beta * (p.n - 2.0) / p.gamma)
}

/// Edge reproduction number including waning:
/// `beta (n-1)(gamma+eps) / (gamma (gamma+beta+eps))`.
pub fn r1_closed(p: &Params) -> Result<f64> {
    require_degree(p)?;
    let Params { beta, gamma, epsilon: eps, n } = *p;
    Ok(beta * (n - 1.0) * (gamma + eps) / (gamma * (gamma + beta + eps)))
}

/// Edge reproduction number of the fast limit, `beta (n-1) / (beta+gamma)`.
pub fn r1_limit(p: &Params) -> Result<f64> {
    r1_closed(&p.with_epsilon(0.0))
}

/// `beta n / (2 beta + gamma)`, a third threshold quantity of the fast limit.
pub fn r2_limit(p: &Params) -> Result<f64> {
    require_degree(p)?;
    Ok(p.beta * p.n / (2.0 * p.beta + p.gamma))
}

/// Transmission and transition matrices for the infected compartments
/// `(SI, II/2, IR)` at the disease-free state.
pub fn next_generation_matrices(p: &Params) -> (Matrix3<f64>, Matrix3<f64>) {
    let Params { beta, gamma, epsilon: eps, n } = *p;
    #[rustfmt::skip]
    let m = Matrix3::new(
        beta * (n - 1.0), 0.0, 0.0,
        0.0, 0.0, 0.0,
        0.0, 0.0, 0.0,
    );
    #[rustfmt::skip]
    let v = Matrix3::new(
        gamma + beta, 0.0, -eps,
        -beta, 2.0 * gamma, 0.0,
        0.0, -2.0 * gamma, gamma + eps,
    );
    (m, v)
}

/// Spectral radius of `M V^-1`, computed numerically.
pub fn r1_ngm(p: &Params) -> Result<f64> {
    require_degree(p)?;
    let (m, v) = next_generation_matrices(p);
    let v_inv = v.try_inverse().ok_or(Error::Numeric("singular transition matrix"))?;
    let k = m * v_inv;
    let radius = k.complex_eigenvalues().iter().map(|z| z.re.hypot(z.im)).fold(0.0_f64, f64::max);
    ensure_finite(&[radius], "next-generation spectral radius")?;
    Ok(radius)
}

/// Endemic equilibrium to first order in `epsilon` (zeroth order for `S`, `SS`).
pub fn endemic_equilibrium_series(p: &Params) -> Result<ReducedState> {
    let r = r0(p)?;
    if r <= 1.0 {
        return Err(Error::Domain(format!("endemic equilibrium needs R0 > 1, got {r}")));
    }
    let Params { beta, gamma, epsilon: eps, n } = *p;
    let d = (n * n - n - 1.0) * beta - gamma;
    let growth = n * ((n - 2.0) * beta - gamma);
    Ok(ReducedState {
        s: (n - 1.0) * (gamma + beta) / d,
        i: eps * growth / (gamma * d),
        ss: n * (gamma + beta) * (gamma + beta) / (beta * d),
        si: eps * growth / (beta * d),
        ii: eps * growth / (gamma * d),
    })
}

/// Eigenvalues of the reduced system linearised at a point of the critical manifold.
pub fn eigen_on_c0(point: SlowPoint, p: &Params) -> Result<EigenData> {
    ensure_finite(&point.to_array(), "slow point")?;
    if point.s <= 0.0 {
        return Err(Error::Domain(format!("transverse eigenvalue undefined at S = {}", point.s)));
    }
    Ok(EigenData { lambda: [0.0, 0.0, -p.gamma, -2.0 * p.gamma, lambda5(point, p)] })
}

/// Transverse eigenvalue `beta (n-1) SS / (n S) - (gamma + beta)`, using the
/// bounded ratio near `S = 0`.
#[inline]
pub fn lambda5(point: SlowPoint, p: &Params) -> f64 {
    p.beta * p.closure_factor() * bounded_ratio(point.ss, point.s, p.n) - (p.gamma + p.beta)
}

/// The three reference curves on the critical manifold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    n: f64,
    l_slope: f64,
}

pub fn geometry(p: &Params) -> Geometry {
    Geometry { n: p.n, l_slope: p.n * (p.beta + p.gamma) / (p.beta * (p.n - 1.0)) }
}

impl Geometry {
    /// Slope `L` of the loss-of-hyperbolicity line.
    pub fn l_slope(&self) -> f64 {
        self.l_slope
    }

    pub fn l_line(&self, s: f64) -> f64 {
        self.l_slope * s
    }

    pub fn parabola(&self, s: f64) -> f64 {
        self.n * s * s
    }

    /// Curve where the transverse eigenvalue is stationary under the slow flow.
    pub fn alpha(&self, s: f64) -> f64 {
        2.0 * self.n * s * s / (s + 1.0)
    }

    /// Strictly above the line means `lambda5 > 0` (fast repulsion).
    pub fn is_repelling(&self, point: SlowPoint) -> bool {
        point.ss > self.l_line(point.s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(beta: f64, eps: f64, n: f64) -> Params {
        Params::unit_gamma(beta, eps, n).unwrap()
    }

    #[test]
    fn disease_free_point_is_stationary() {
        for eps in [0.0, 0.01, 0.3] {
            let q = p(2.0, eps, 4.0);
            let d = full_rhs(&FullState::disease_free(4.0), &q).unwrap();
            assert_eq!(d.to_array(), [0.0; 8]);
            let r = reduced_rhs(&ReducedState::disease_free(4.0), &q).unwrap();
            assert_eq!(r.to_array(), [0.0; 5]);
        }
    }

    #[test]
    fn critical_manifold_is_fast_equilibrium_without_waning() {
        let q = p(1.7, 0.0, 5.0);
        let x = FullState { s: 0.4, ss: 1.1, sr: 0.9, rr: 2.0, ..Default::default() };
        let d = full_rhs(&x, &q).unwrap();
        assert_eq!(d.to_array(), [0.0; 8]);
    }

    #[test]
    fn critical_manifold_infected_components_vanish_with_waning() {
        let q = p(2.0, 0.2, 4.0);
        let x = ReducedState::new(0.3, 0.0, 0.2, 0.0, 0.0);
        let d = reduced_rhs(&x, &q).unwrap();
        assert_eq!((d.i, d.si, d.ii), (0.0, 0.0, 0.0));
        assert!(d.s > 0.0);
    }

    #[test]
    fn layer_without_si_freezes_slow_variables() {
        let q = p(2.0, 0.0, 4.0);
        let x = ReducedState::new(0.5, 0.1, 1.0, 0.0, 0.2);
        let d = layer_rhs(&x, &q).unwrap();
        assert_eq!(d.s, 0.0);
        assert_eq!(d.ss, 0.0);
        assert_eq!(d.i, -0.1);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let q = p(2.0, 0.01, 4.0);
        let x = FullState { s: f64::NAN, ..FullState::disease_free(4.0) };
        assert!(matches!(full_rhs(&x, &q), Err(Error::NonFinite(_))));
    }

    #[test]
    fn state_outside_delta_is_rejected() {
        let q = p(2.0, 0.01, 4.0);
        let x = ReducedState::new(0.5, 0.1, 2.5, 0.5, 0.0);
        assert!(matches!(reduced_rhs(&x, &q), Err(Error::Domain(_))));
    }

    #[test]
    fn reproduction_numbers_by_substitution() {
        let q = p(2.0, 0.0, 4.0);
        assert_eq!(r0(&q).unwrap(), 4.0);
        assert_eq!(r1_closed(&q).unwrap(), 2.0);
        let q = p(2.0, 0.1, 4.0);
        assert!((r1_closed(&q).unwrap() - 6.6 / 3.1).abs() < 1e-15);
        let q = p(1.5, 0.0, 3.0);
        assert!((1.0 / r1_closed(&q).unwrap() - 0.833).abs() < 5e-4);
        assert!((r1_ngm(&p(2.0, 0.0, 4.0)).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn thresholds_agree_at_criticality() {
        // beta (n - 2) = gamma
        let q = p(0.5, 0.0, 4.0);
        assert!((r0(&q).unwrap() - 1.0).abs() < 1e-15);
        assert!((r1_limit(&q).unwrap() - 1.0).abs() < 1e-15);
        assert!((r2_limit(&q).unwrap() - 1.0).abs() < 1e-15);
        assert!((r1_ngm(&q).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degree_two_is_rejected() {
        let q = Params { beta: 1.0, gamma: 1.0, epsilon: 0.0, n: 2.0 };
        assert!(r0(&q).is_err());
        assert!(r1_ngm(&q).is_err());
        assert!(Params::new(1.0, 1.0, 0.0, 2.0).is_err());
        assert!(Params::new(1.0, 0.0, 0.0, 4.0).is_err());
    }

    #[test]
    fn series_equilibrium_values() {
        let q = p(2.0, 1e-3, 4.0);
        let e = endemic_equilibrium_series(&q).unwrap();
        assert!((e.s - 3.0 / 7.0).abs() < 1e-15);
        assert!((e.ss - 6.0 / 7.0).abs() < 1e-15);
        assert!((e.i - 4.0 / 7.0 * 1e-3).abs() < 1e-17);
        assert!(endemic_equilibrium_series(&p(0.4, 0.01, 4.0)).is_err());
    }

    #[test]
    fn eigenvalues_on_critical_manifold() {
        let q = p(2.0, 0.0, 4.0);
        let e = eigen_on_c0(SlowPoint::new(1.0, 4.0), &q).unwrap();
        assert_eq!(e.lambda, [0.0, 0.0, -1.0, -2.0, 3.0]);
        let g = geometry(&q);
        let on_line = SlowPoint::new(0.37, g.l_line(0.37));
        assert!(eigen_on_c0(on_line, &q).unwrap().lambda5().abs() < 1e-14);
        assert!(eigen_on_c0(SlowPoint::new(0.0, 0.0), &q).is_err());
    }

    #[test]
    fn geometry_reference_values() {
        let q = p(2.0, 0.0, 4.0);
        let g = geometry(&q);
        assert_eq!(g.l_slope(), 2.0);
        assert_eq!(g.l_slope(), 4.0 / r1_closed(&q).unwrap());
        assert_eq!(g.alpha(1.0), g.parabola(1.0));
        for k in 1..1000 {
            let s = k as f64 / 1000.0;
            assert!(g.alpha(s) > g.parabola(s));
        }
    }

    #[test]
    fn bounded_ratio_clamps_near_zero() {
        assert_eq!(bounded_ratio(0.0, 0.0, 4.0), 0.0);
        assert_eq!(bounded_ratio(1e-3, 0.0, 4.0), 4.0);
        assert!((bounded_ratio(1e-14, 1e-13, 4.0) - 0.1).abs() < 1e-15);
        assert_eq!(bounded_ratio(1.0, 0.5, 4.0), 2.0);
    }
}
