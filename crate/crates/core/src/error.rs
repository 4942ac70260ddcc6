use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    Spectrum(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("statistic not defined for this model: {0}")]
    Branch(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
