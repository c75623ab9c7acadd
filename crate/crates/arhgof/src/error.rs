//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by simulation, estimation, testing, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must live on the same grid do not.
    #[error("grid mismatch: {context} (left has {left} nodes, right has {right})")]
    GridMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    /// A kernel that must be symmetric is not.
    #[error("matrix not symmetric: {context} (max |K[i,j] - K[j,i]| = {max_asym:e})")]
    NotSymmetric {
        context: &'static str,
        max_asym: f64,
    },

    /// A value that must be finite is NaN or infinite.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    /// A grid or matrix has an unusable shape.
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    /// Not enough observations for the requested operation.
    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Configuration could not be parsed or fails validation.
    #[error("config error: {0}")]
    Config(String),

    /// A numerical routine failed (e.g. factorization after jitter retries).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed CSV input.
    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
