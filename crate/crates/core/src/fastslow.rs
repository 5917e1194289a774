//! The two limit regimes and the maps between them.
//!
//! A fast jump starts at a point `(S0, SS0)` of the repelling part of the
//! critical manifold and lands at `(S_inf, SS_inf)`, where `S_inf` is the
//! smaller zero of `H` and `SS_inf` follows from the constant of motion of the
//! layer flow. The slow flow then carries the landing point along the
//! attracting part until the accumulated transverse eigenvalue vanishes.

use alloc::format;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{ensure_finite, Error, Result};
use crate::model::{geometry, lambda5, r1_limit, Params, SlowPoint};
use crate::{quad, roots};

/// Absolute tolerance of the exit-time quadrature.
pub const QUAD_TOL: f64 = 1e-12;

/// Largest accepted gap between the closed-form exit time and quadrature.
pub const EXIT_CONSISTENCY_TOL: f64 = 1e-6;

/// Below this `|S_inf - 1|` the closed form loses too many digits and the
/// exit time is computed by quadrature alone.
pub const CLOSED_FORM_MIN_A: f64 = 1e-4;

const ROOT_TOL: f64 = 1e-12;
const TIME_TOL: f64 = 1e-10;
const HORIZON: f64 = 1e4;

/// `ln SS - (2(n-1)/n) ln S`, conserved by the layer flow.
pub fn constant_of_motion(s: f64, ss: f64, n: f64) -> Result<f64> {
    ensure_finite(&[s, ss, n], "constant of motion")?;
    if s <= 0.0 || ss <= 0.0 {
        return Err(Error::Domain(format!("constant of motion needs S, SS > 0, got ({s}, {ss})")));
    }
    Ok(ss.ln() - 2.0 * (n - 1.0) / n * s.ln())
}

/// Landing value of `SS` once `S` has dropped from `s0` to `s_inf` along the layer flow.
pub fn ss_infinity(s0: f64, ss0: f64, s_inf: f64, n: f64) -> Result<f64> {
    ensure_finite(&[s0, ss0, s_inf, n], "ss_infinity")?;
    if s0 <= 0.0 || s_inf < 0.0 {
        return Err(Error::Domain(format!("ss_infinity needs S0 > 0 and S_inf >= 0, got ({s0}, {s_inf})")));
    }
    Ok(ss0 * (s_inf / s0).powf((2.0 * n - 2.0) / n))
}

/// `H(x)` whose smaller zero is the landing value of `S` for a jump from `(s0, ss0)`.
pub fn h_function(x: f64, s0: f64, ss0: f64, p: &Params) -> f64 {
    let n = p.n;
    let rn = 1.0 / n;
    n * (p.beta + p.gamma) / p.beta * (x.powf(rn) - s0.powf(rn))
        - ss0 * (s0.powf(2.0 * rn - 2.0) * x.powf(1.0 - rn) - s0.powf(rn - 1.0))
}

fn h_derivative(x: f64, s0: f64, ss0: f64, p: &Params) -> f64 {
    let n = p.n;
    let rn = 1.0 / n;
    (p.gamma + p.beta) / p.beta * x.powf(rn - 1.0) - (n - 1.0) / n * ss0 * s0.powf(2.0 * rn - 2.0) * x.powf(-rn)
}

/// `G(x)`, the parabola specialisation of `H` divided by `n`.
pub fn g_function(x: f64, s0: f64, p: &Params) -> f64 {
    let rn = 1.0 / p.n;
    (p.beta + p.gamma) / p.beta * (x.powf(rn) - s0.powf(rn)) - s0.powf(2.0 * rn) * x.powf(1.0 - rn) + s0.powf(1.0 + rn)
}

/// Upper end of the bracket for the smaller zero of `H`: the critical point
/// `((L S0) / SS0)^(n/(n-2)) S0`.
pub fn h_bracket(s0: f64, ss0: f64, p: &Params) -> f64 {
    let l = geometry(p).l_slope();
    (l * s0 / ss0).powf(p.n / (p.n - 2.0)) * s0
}

fn check_repelling(s0: f64, ss0: f64, p: &Params) -> Result<()> {
    p.validate()?;
    ensure_finite(&[s0, ss0], "jump start")?;
    if !(s0 > 0.0 && s0 <= 1.0) {
        return Err(Error::Domain(format!("jump start needs S0 in (0, 1], got {s0}")));
    }
    let l = geometry(p).l_slope();
    if ss0 <= l * s0 {
        return Err(Error::Inconsistent(format!(
            "start ({s0}, {ss0}) is not above the loss-of-hyperbolicity line SS = {l} S"
        )));
    }
    Ok(())
}

/// Landing value `S_inf` of the fast jump from `(s0, ss0)`.
pub fn entry_root_h(s0: f64, ss0: f64, p: &Params) -> Result<f64> {
    check_repelling(s0, ss0, p)?;
    let hi = h_bracket(s0, ss0, p);
    let f = |x: f64| h_function(x, s0, ss0, p);
    if !(f(0.0) < 0.0 && f(hi) > 0.0) {
        return Err(Error::Inconsistent(format!("H has no sign change on [0, {hi}] for start ({s0}, {ss0})")));
    }
    roots::bisect_newton(f, |x| h_derivative(x, s0, ss0, p), 0.0, hi, ROOT_TOL, 1e-15)
}

/// Landing value `S_inf` of the fast jump from the parabola point above `s0`.
pub fn entry_root_g(s0: f64, p: &Params) -> Result<f64> {
    let ss0 = p.n * s0 * s0;
    if r1_limit(p)? * s0 <= 1.0 {
        return Err(Error::Inconsistent(format!("parabola start S0 = {s0} is not beyond 1/R1")));
    }
    check_repelling(s0, ss0, p)?;
    let hi = h_bracket(s0, ss0, p);
    let f = |x: f64| g_function(x, s0, p);
    if !(f(0.0) < 0.0 && f(hi) > 0.0) {
        return Err(Error::Inconsistent(format!("G has no sign change on [0, {hi}] for S0 = {s0}")));
    }
    roots::bisect_newton(f, |x| h_derivative(x, s0, ss0, p) / p.n, 0.0, hi, ROOT_TOL, 1e-15)
}

/// Closed-form slow flow from `entry` after slow time `tau`.
pub fn slow_solution(entry: SlowPoint, tau: f64, n: f64) -> SlowPoint {
    let a = entry.s - 1.0;
    let b = entry.ss - n;
    let e = (-tau).exp();
    SlowPoint { s: a * e + 1.0, ss: 2.0 * a * n * e * e * (1.0 / e - 1.0) + b * e * e + n }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ExitMethod {
    ClosedForm,
    Quadrature,
}

/// One passage along the attracting part of the critical manifold.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntryExitRecord {
    pub entry: SlowPoint,
    /// Slow time spent before the orbit leaves the manifold.
    pub exit_time: f64,
    pub exit: SlowPoint,
    pub method: ExitMethod,
}

/// Accumulated transverse eigenvalue `int_0^T lambda5` along the slow flow, in closed form.
pub fn exit_integral(entry: SlowPoint, t: f64, p: &Params) -> f64 {
    let n = p.n;
    let a = entry.s - 1.0;
    let b = entry.ss - n;
    let et = (-t).exp();
    // c is the offset SS - n S^2 from the parabola; the log term is the
    // integration constant that makes the integral vanish at t = 0
    let c = b - a * (a + 2.0) * n;
    let log_term = if c == 0.0 { 0.0 } else { c * ((a * et + 1.0) / entry.s).ln() };
    let bracket = (a * a * n * t + a * et * (2.0 * a * n - b) + log_term) / (a * a) - (2.0 * a * n - b) / a;
    -(p.gamma + p.beta) * t + p.beta * (n - 1.0) / n * bracket
}

/// The same integral by adaptive quadrature.
pub fn exit_integral_quadrature(entry: SlowPoint, t: f64, p: &Params) -> Result<f64> {
    quad::integrate(|tau| lambda5(slow_solution(entry, tau, p.n), p), 0.0, t, QUAD_TOL)
}

fn lambda5_along(entry: SlowPoint, tau: f64, p: &Params) -> f64 {
    lambda5(slow_solution(entry, tau, p.n), p)
}

fn check_attracting(entry: SlowPoint, p: &Params) -> Result<()> {
    p.validate()?;
    ensure_finite(&entry.to_array(), "slow entry")?;
    if entry.s < 0.0 || entry.s > 1.0 || entry.ss < 0.0 {
        return Err(Error::Domain(format!("slow entry {entry:?} outside the critical manifold")));
    }
    if entry.s == 1.0 {
        return Err(Error::DegenerateEntry);
    }
    let l5 = lambda5(entry, p);
    if l5 >= 0.0 {
        return Err(Error::Inconsistent(format!("entry {entry:?} is not attracting (lambda5 = {l5})")));
    }
    if p.beta * (p.n - 2.0) <= p.gamma {
        return Err(Error::Domain("the slow flow never reaches the repelling side when R0 <= 1".into()));
    }
    Ok(())
}

/// Slow time at which the transverse eigenvalue first turns positive.
fn hyperbolicity_loss_time(entry: SlowPoint, p: &Params) -> Result<f64> {
    let g = |tau: f64| lambda5_along(entry, tau, p);
    let hi = roots::expand_upper(g, 0.0, 0.125, HORIZON)?;
    roots::bisect(g, 0.0, hi, 1e-13)
}

fn root_after<F: FnMut(f64) -> f64>(mut f: F, entry: SlowPoint, tau0: f64, p: &Params) -> Result<f64> {
    let width = tau0.max(0.125);
    let hi = roots::expand_upper(&mut f, tau0, tau0 + width, HORIZON)?;
    roots::bisect_newton(f, |t| lambda5_along(entry, t, p), tau0, hi, TIME_TOL, 1e-15)
}

/// Exit time computed by quadrature of `lambda5` only.
pub fn exit_time_quadrature(entry: SlowPoint, p: &Params) -> Result<f64> {
    check_attracting(entry, p)?;
    let tau0 = hyperbolicity_loss_time(entry, p)?;
    // the integral is monotone on each side of tau0, so bisection sees one sign change
    let f = |t: f64| exit_integral_quadrature(entry, t, p).unwrap_or(f64::NAN);
    root_after(f, entry, tau0, p)
}

fn sampled_check(entry: SlowPoint) -> bool {
    if cfg!(debug_assertions) {
        return true;
    }
    let mut h = entry.s.to_bits() ^ entry.ss.to_bits().rotate_left(29);
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h.is_multiple_of(100)
}

/// Exit time and exit point of the slow passage starting at `entry`.
///
/// The closed-form integral is used unless `S_inf` is within `1e-4` of 1.
/// The result is checked against quadrature on every call in debug builds and
/// on a deterministic one-in-a-hundred sample of entries otherwise.
pub fn exit_time(entry: SlowPoint, p: &Params) -> Result<EntryExitRecord> {
    exit_time_checked(entry, p, sampled_check(entry))
}

/// As [`exit_time`], with the quadrature cross-check forced on or off.
pub fn exit_time_checked(entry: SlowPoint, p: &Params, cross_check: bool) -> Result<EntryExitRecord> {
    check_attracting(entry, p)?;
    let a = entry.s - 1.0;
    let (t, method) = if a.abs() < CLOSED_FORM_MIN_A {
        (exit_time_quadrature(entry, p)?, ExitMethod::Quadrature)
    } else {
        let tau0 = hyperbolicity_loss_time(entry, p)?;
        let t = root_after(|t| exit_integral(entry, t, p), entry, tau0, p)?;
        if cross_check {
            let q = exit_time_quadrature(entry, p)?;
            if (q - t).abs() > EXIT_CONSISTENCY_TOL {
                return Err(Error::ExitTimeMismatch { closed: t, quadrature: q });
            }
        }
        (t, ExitMethod::ClosedForm)
    };
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Inconsistent(format!("non-positive exit time {t}")));
    }
    Ok(EntryExitRecord { entry, exit_time: t, exit: slow_solution(entry, t, p.n), method })
}

/// Exponent `C = ((n-2) beta - gamma) / (beta (n-1))` of the parabola exit map.
pub fn parabola_exponent(p: &Params) -> f64 {
    ((p.n - 2.0) * p.beta - p.gamma) / (p.beta * (p.n - 1.0))
}

/// `ln h(x) = C ln(1 - x) + x`.
pub fn log_h(x: f64, c: f64) -> f64 {
    c * (1.0 - x).ln() + x
}

/// Exit point of a slow passage that enters on the parabola at `s_entry`.
pub fn parabola_exit(s_entry: f64, p: &Params) -> Result<SlowPoint> {
    p.validate()?;
    ensure_finite(&[s_entry], "parabola entry")?;
    let c = parabola_exponent(p);
    if c <= 0.0 {
        return Err(Error::Domain(format!("parabola exit needs R0 > 1 (C = {c})")));
    }
    let knee = 1.0 - c;
    if !(0.0..knee).contains(&s_entry) {
        return Err(Error::Domain(format!("parabola entry {s_entry} not in the attracting range [0, {knee})")));
    }
    let target = log_h(s_entry, c);
    let f = |x: f64| log_h(x, c) - target;
    let mut gap = 0.1_f64.min(1.0 - knee);
    while f(1.0 - gap) >= 0.0 {
        gap *= 0.1;
        if gap < 1e-16 {
            return Err(Error::NoBracket { lo: knee, hi: 1.0 });
        }
    }
    let x = roots::bisect_newton(f, |x| 1.0 - c / (1.0 - x), knee, 1.0 - gap, ROOT_TOL, 1e-16)?;
    Ok(SlowPoint::on_parabola(x, p.n))
}
