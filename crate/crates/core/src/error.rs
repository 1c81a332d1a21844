use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's contract (bad ids, wrong sizes, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A hypothesis required by an analysis does not hold for this input.
    #[error("precondition not met: {0}")]
    Precondition(String),

    /// An exhaustive search would exceed its configured cap.
    #[error("capacity exceeded: {what} needs {requested}, cap is {limit}")]
    Capacity {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    /// An internal invariant failed. Either a bug or a rule that lacks a
    /// property the algorithm relies on.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
