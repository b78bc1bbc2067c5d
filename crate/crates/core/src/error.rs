use thiserror::Error;

/// Errors raised by the library. The CLI maps these onto exit codes.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("index or quantity out of range: {0}")]
    Range(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid valuation or domain: {0}")]
    InvalidDomain(String),
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("integrity violation: {0}")]
    Integrity(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
