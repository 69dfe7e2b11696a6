//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by game oracles, optimizers, analyzers, and the bench
/// harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input vector or matrix does not match the dimensions the operation
    /// requires.
    #[error("{context}: expected dimension {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// The operation is not defined for the given game kind or input class.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A direct linear solve failed; `cond` is the 2-norm condition estimate
    /// of the system matrix (infinite when exactly singular).
    #[error("linear system is singular or near-singular (condition estimate {cond:.3e})")]
    SingularSystem { cond: f64 },

    /// A NaN or infinity appeared while producing a new state.
    #[error("{context}: non-finite value produced at step {step}")]
    NonFinite { context: &'static str, step: usize },

    /// An argument is outside the operation's domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A config file could not be parsed or is internally inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// An I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Convenience constructor for shape mismatches.
    pub fn shape(context: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::ShapeMismatch {
            context,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    /// Wraps an I/O error with its path.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
