use thiserror::Error;

/// Errors produced by the svtail library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix contains a NaN or infinite entry")]
    NonFinite,

    #[error("iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("empty matrix list")]
    EmptyList,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("e^(theta*x) overflowed at theta = {theta}")]
    OverflowAtTheta { theta: f64 },

    #[error("invalid t-grid: {0}")]
    InvalidGrid(String),

    #[error("unknown bound tag `{0}`")]
    UnknownTag(String),

    #[error("bound `{tag}` does not apply to {ensemble}")]
    TagNotApplicable { tag: String, ensemble: String },

    #[error("unknown model `{0}` (expected gaussian, rademacher or uniform:<a>)")]
    UnknownModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        reason: reason.into(),
    }
}
