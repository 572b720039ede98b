use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The problem file is not well-formed JSON.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    /// The problem parsed but violates a structural invariant.
    #[error("invalid problem: {0}")]
    Invalid(String),

    /// A scope, index, or argument is out of range for the problem.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The requested grid would exceed the configured point cap.
    #[error("grid of {points} points exceeds cap of {cap}")]
    GridCapExceeded { points: u128, cap: u64 },

    /// An operation that needs a nonempty set was handed an empty one.
    #[error("empty set: {0}")]
    EmptySet(String),

    /// A guaranteed-feasible linear system turned out infeasible; this
    /// signals a bug or degenerate numerics, not bad input.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}
