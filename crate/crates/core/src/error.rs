use thiserror::Error;

/// Errors surfaced by the solvers and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed instance, allocation or parameter.
    #[error("validation error: {0}")]
    Validation(String),

    /// Input is well formed but outside the preference domain an algorithm requires.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested measure or objective is not defined for this profile kind.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An exhaustive search was asked to run above its configured size.
    #[error("refusing exhaustive search: {what} is {actual}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        actual: u128,
        cap: u128,
    },

    /// Two allocations disagree with the preference graph they are checked against.
    #[error("inconsistent with preference graph: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
