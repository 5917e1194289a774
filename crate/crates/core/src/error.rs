use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the model, the integrator and the analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// A state or point lies outside the region where the operation is defined.
    #[error("outside domain: {0}")]
    Domain(String),

    /// Inputs violate the preconditions of a root or map computation.
    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64, state: Vec<f64> },

    #[error("step budget of {steps} exhausted at t = {t}")]
    StepLimit { t: f64, steps: usize },

    #[error("entry point with S = 1 has no exit time")]
    DegenerateEntry,

    #[error("exit time closed form {closed} disagrees with quadrature {quadrature}")]
    ExitTimeMismatch { closed: f64, quadrature: f64 },

    #[error("eigenvalue computation failed: {0}")]
    Numeric(&'static str),

    #[error("return map left the admissible region at iteration {iteration}: {reason}")]
    Divergence { iteration: usize, reason: String },

    #[error("graph generation failed after {0} attempts")]
    GraphGeneration(usize),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
