use std::io;
use std::path::PathBuf;

use sgnpoly_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] CoreError),
    /// An input file could not be opened or read.
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: io::Error },
    /// Writing output failed.
    #[error(transparent)]
    Io(#[from] io::Error),
    /// Malformed edge list.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    /// Bad flag combination or value caught after argument parsing.
    #[error("{0}")]
    Usage(String),
    /// Experiment or command configuration is inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("could not start worker threads: {0}")]
    ThreadPool(String),
    /// The self-check found a disagreement between two evaluation paths.
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// 2 for usage errors, 3 for bad data, 1 for anything internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::UnknownPreset(_) => 2,
            Error::Core(CoreError::EigenFailure | CoreError::NonConvergence { .. }) => 1,
            Error::Core(_) | Error::File { .. } | Error::Parse { .. } | Error::Json(_) | Error::Config(_) => 3,
            Error::Io(_) | Error::Csv(_) | Error::ThreadPool(_) | Error::OracleMismatch(_) => 1,
        }
    }
}
