use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid tail exponent {0}: must be positive")]
    InvalidExponent(f64),
    #[error("invalid horizon {0}: must be at least 2")]
    InvalidHorizon(usize),
    #[error("horizon {requested} exceeds the available range {available}")]
    HorizonExceeded { requested: usize, available: usize },
    #[error("law is not recurrent (total mass {0}); apply terminating_shift first")]
    NotRecurrent(f64),
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("input length {got} does not match the expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension 2^{0} exceeds the supported representation")]
    DimensionExceeded(usize),
    #[error("degenerate block size {0}: blocks need at least two sites")]
    DegenerateBlock(usize),
    #[error("covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("covariance must be factorized before sampling")]
    MustFactorizeFirst,
    #[error("tilt {epsilon} outside the admissible window (must be < {limit})")]
    InvalidTilt { epsilon: f64, limit: f64 },
    #[error("resource guard: {what} = {value} exceeds the limit {limit}")]
    ResourceGuard {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("gap {gap} outside the window [0, {window})")]
    OutOfWindow { gap: usize, window: usize },
    #[error("invalid index set: {0}")]
    InvalidIndexSet(&'static str),
    #[error("invalid coarse-graining targets: {0}")]
    InvalidTargets(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter { name, value, reason }
    }
}

pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::param(name, value, reason)
}
