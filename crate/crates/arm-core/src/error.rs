//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by I/O, validation, and numerical routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Underlying filesystem failure while reading or writing `path`.
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed file contents. `line` is 1-based; 0 means the whole file.
    #[error("{path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    /// Incompatible matrix or label dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A configuration value is out of its documented domain.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A numerical routine failed (no convergence, non-finite values, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
