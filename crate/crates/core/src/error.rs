use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A logarithm or shape was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// An index or query fell outside the tabulated range.
    #[error("range error: {0}")]
    Range(String),
    /// A table would exceed the configured memory budget.
    #[error("resource error: {0}")]
    Resource(String),
    /// Invalid walk or simulation parameters.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
