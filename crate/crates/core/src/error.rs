use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("evaluation too close to a pole: {0}")]
    PoleProximity(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("truncation order exceeded: {0}")]
    Truncation(String),
    #[error("mismatched algebra tags: {0}")]
    TagMismatch(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
