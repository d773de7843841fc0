use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole at s = {0}")]
    Pole(f64),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("insufficient span: {0}")]
    InsufficientSpan(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
