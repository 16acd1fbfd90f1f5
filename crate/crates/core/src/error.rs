use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },

    #[error("coincident positions for link {0}")]
    CoincidentNodes(&'static str),

    #[error("domain error in {func}: {reason}")]
    Domain { func: &'static str, reason: String },

    #[error("{func} failed to converge after {iterations} iterations")]
    NoConvergence { func: &'static str, iterations: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("too many training slots: K = {k} exceeds M_B - 2 = {limit} (BS beams would have to be reused)")]
    TooManySlots { k: usize, limit: usize },

    #[error("RIS scheme `{0}` cannot produce training profiles")]
    Scheme(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("operation requires a {expected} model")]
    ModelKind { expected: &'static str },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(func: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            func,
            reason: reason.into(),
        }
    }
}
