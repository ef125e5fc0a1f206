use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pole at {0}")]
    Pole(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not a fundamental discriminant: {0}")]
    NotFundamental(i64),
    #[error("invalid character table: {0}")]
    InvalidTable(String),
    #[error("arguments not coprime: {0}")]
    NonCoprime(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("truncation insufficient: {0}")]
    Truncation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
