//! Crate-wide error type.

use std::fmt;
use std::path::PathBuf;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// A configuration or argument value is outside its documented range.
    InvalidParameter(String),
    /// Filesystem failure while reading or writing a dataset directory.
    Io { path: PathBuf, source: std::io::Error },
    /// A dataset file exists but a line does not parse.
    Parse { path: PathBuf, line: usize, message: String },
    /// Dataset files parse individually but disagree with each other.
    Data(String),
    /// Iterative solver failed to reach `tol` within `max_iter` sweeps.
    NonConvergence { iterations: usize, residual: f64 },
    /// Training produced a non-finite loss.
    Divergence { epoch: usize, message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Io { path, source } => write!(f, "io error at {}: {source}", path.display()),
            Error::Parse { path, line, message } => {
                write!(f, "parse error at {}:{line}: {message}", path.display())
            }
            Error::Data(msg) => write!(f, "inconsistent dataset: {msg}"),
            Error::NonConvergence { iterations, residual } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:.3e})"
            ),
            Error::Divergence { epoch, message } => {
                write!(f, "training diverged at epoch {epoch}: {message}")
            }
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}
