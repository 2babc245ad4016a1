use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical or probabilistic argument lies outside its valid range.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configuration value is inconsistent or missing.
    #[error("config error: {0}")]
    Config(String),
    /// A joint probability matrix does not describe a distribution.
    #[error("integrity error: {0}")]
    Integrity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
