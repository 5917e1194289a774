//! Scalar root finding on a bracket.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 200;

/// Bisection on `[lo, hi]` until the bracket is narrower than `xtol`.
///
/// Endpoint values that are exactly zero are returned immediately.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::NonFinite("bracket endpoint"));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(Error::NonFinite("bisection midpoint"));
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisect to `coarse`, then polish with Newton steps that are rejected as
/// soon as they leave the bracket or fail to shrink the residual.
pub fn bisect_newton<F, D>(mut f: F, mut df: D, lo: f64, hi: f64, coarse: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
    D: FnMut(f64) -> f64,
{
    let (a, b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut x = bisect(&mut f, a, b, coarse)?;
    let mut fx = f(x);
    for _ in 0..50 {
        let d = df(x);
        if !d.is_finite() || d == 0.0 {
            break;
        }
        let step = fx / d;
        let next = x - step;
        if !(a..=b).contains(&next) {
            break;
        }
        let fnext = f(next);
        if !fnext.is_finite() || fnext.abs() > fx.abs() {
            break;
        }
        x = next;
        fx = fnext;
        if step.abs() <= tol * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

/// Grow `hi` by doubling its distance from `lo` until `f` changes sign.
pub fn expand_upper<F: FnMut(f64) -> f64>(mut f: F, lo: f64, mut hi: f64, limit: f64) -> Result<f64> {
    let flo = f(lo);
    let mut width = hi - lo;
    while hi <= limit {
        let fhi = f(hi);
        if !fhi.is_finite() {
            return Err(Error::NonFinite("bracket expansion"));
        }
        if fhi.signum() != flo.signum() || fhi == 0.0 {
            return Ok(hi);
        }
        width *= 2.0;
        hi = lo + width;
    }
    Err(Error::NoBracket { lo, hi: limit })
}
