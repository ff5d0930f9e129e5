use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the identification toolchain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFiniteValue(&'static str),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("model requires an external scheduling signal but the dataset carries none")]
    MissingScheduling,

    #[error("invalid model structure: {0}")]
    InvalidStructure(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("every candidate group fell below the pruning threshold {threshold:e}")]
    AllGroupsPruned { threshold: f64 },

    #[error("reference signal is constant, best-fit rate is undefined")]
    DegenerateReference,

    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: schema error: {msg}")]
    Schema { path: PathBuf, msg: String },

    #[error("all {0} training runs failed")]
    AllRunsFailed(usize),

    #[error("reverse-mode recording is already active on this thread")]
    NestedRecording,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dims(context: &'static str, expected: usize, got: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            got,
        }
    }
}
