//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A point was outside the mesh domain.
    #[error("point ({0}, {1}, {2}) is outside the domain")]
    OutOfDomain(f64, f64, f64),

    /// Bad run configuration, unknown keys, missing inputs, schema mismatch.
    #[error("configuration error: {0}")]
    Config(String),

    /// The iterative solver hit its iteration cap before reaching the
    /// requested tolerance.
    #[error("solver failed: relative residual {residual:.3e} after {iterations} iterations (tolerance {tolerance:.1e})")]
    SolverFailure {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    /// A failure while producing one dataset sample, tagged with its index.
    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} (line {line}): {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for configuration problems,
    /// 3 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) | Error::Parse { .. } => 2,
            Error::OutOfDomain(..) | Error::SolverFailure { .. } | Error::Io { .. } => 3,
            Error::Sample { source, .. } => source.exit_code(),
        }
    }
}
