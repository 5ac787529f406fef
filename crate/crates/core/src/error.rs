use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("fit failure: {0}")]
    FitFailure(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cache i/o: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
