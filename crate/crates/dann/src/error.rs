//! Crate-wide error type.

use thiserror::Error;

/// All fallible operations in this crate return this error.
#[derive(Debug, Error)]
pub enum Error {
    /// Two operands disagree on shape. Both shapes are spelled out so the
    /// message alone is enough to locate the bad call.
    #[error("{op}: dimension mismatch, expected {expected}, found {found}")]
    DimMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("{what} must not be empty")]
    EmptyInput { what: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArg(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Malformed dataset file; `line` is 1-based.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("data error: {0}")]
    Data(String),

    /// A parameter block stopped being finite during training.
    #[error("non-finite value in parameter block {block} at step {step}")]
    NonFinite { block: &'static str, step: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("zero-variance representation: all hidden vectors identical")]
    ZeroVariance,

    /// The domain-discrimination split kept producing single-domain halves.
    #[error("degenerate split after {attempts} attempts: one half holds a single domain")]
    DegenerateSplit { attempts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
