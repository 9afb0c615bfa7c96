use std::io;
use std::path::{Path, PathBuf};

use etl_core::calibration::CalibrationError;
use etl_core::dubins::SimError;
use etl_core::harness::HarnessError;
use etl_core::spec::BindError;
use etl_core::{EmbeddingError, EvalError, SpecError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Spec { path: PathBuf, source: SpecError },
    #[error("{0}")]
    UnknownSpec(String),
    #[error(transparent)]
    Bind(#[from] BindError),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{context}: {source}")]
    Calibration { context: String, source: CalibrationError },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn format(path: impl AsRef<Path>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.as_ref().to_path_buf(),
            message: message.into(),
        }
    }

    /// 2 for spec errors, 3 for data and calibration errors, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Spec { .. } | Error::UnknownSpec(_) => 2,
            Error::Bind(BindError::UnknownPredicate(_)) => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }
}
