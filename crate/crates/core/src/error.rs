use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("coefficient index {index} out of range for degree {degree}")]
    IndexOutOfRange { index: usize, degree: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is undefined at q = 1")]
    UnityRegime(&'static str),

    #[error("precision check failed: {0}")]
    Precision(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("state space has {states} configurations, cap is {cap}")]
    StateSpaceTooLarge { states: u128, cap: usize },

    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
