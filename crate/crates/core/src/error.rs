//! Crate-wide error type.

use std::path::Path;

/// Errors produced by corpus loading, validation, and model training.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A line in an input file could not be parsed.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        /// 1-based line number.
        line: usize,
        msg: String,
    },

    /// Input data violates a documented precondition or invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Configuration values are inconsistent or out of range.
    #[error("config error: {0}")]
    Config(String),

    /// A metric is mathematically undefined for the given input.
    #[error("undefined: {0}")]
    Undefined(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn parse(path: &Path, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.display().to_string(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
