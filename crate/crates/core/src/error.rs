use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the mathematical or physical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inconsistent or invalid configuration (method parameters, sweep pairing).
    #[error("configuration error: {0}")]
    Config(String),
    /// Least-squares fit could not be carried out.
    #[error("fit error: {0}")]
    Fit(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
