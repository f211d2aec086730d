use thiserror::Error;

/// Errors raised by the rate engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An engine produced a result that contradicts its own invariants
    /// (e.g. an LP that must be bounded came back unbounded).
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn inconsistent(msg: impl Into<String>) -> Error {
    Error::Inconsistent(msg.into())
}
