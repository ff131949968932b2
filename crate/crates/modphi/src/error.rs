use alloc::string::String;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("pole at nonpositive integer {0}")]
    Pole(f64),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("no convergence after {0} terms")]
    NonConvergence(usize),
    #[error("capacity exceeded: requested {requested}, limit {limit}")]
    Capacity { requested: u64, limit: u64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error("characteristic function not integrable: tail estimate {0:e}")]
    NotIntegrable(f64),
    #[error("method unavailable: {0}")]
    MethodUnavailable(String),
    #[error("tuning failed, achieved gap {achieved:e} for target {target:e}")]
    Tuning { achieved: f64, target: f64 },
    #[error("cross-check failed: residual {0:e}")]
    CrossCheck(f64),
    #[error("shift calibration drifts: {0}")]
    Calibration(String),
    #[error("balancedness fails: witness ratio {0:e}")]
    Unbalanced(f64),
    #[error("eigenvalue at 1")]
    EigenvalueAtOne,
    #[error("truncation bound {0:e} above tolerance")]
    Truncation(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("missing envelope for cutoff {0}")]
    MissingEnvelope(f64),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn finite(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(what))
    }
}
