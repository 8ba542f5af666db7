use std::io;
use std::path::{Path, PathBuf};

use bimatch_core::{DegreeError, HydroError, MatchError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Degree(#[from] DegreeError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Hydro(#[from] HydroError),
    #[error("malformed graph file, line {line}: {reason}")]
    MalformedGraph { line: usize, reason: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("could not start worker pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl Error {
    /// Process exit code: 1 for environment and I/O failures, 2 for bad
    /// input or impossible requests.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::ThreadPool(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl AsRef<Path>) -> impl FnOnce(io::Error) -> Error {
        let path = path.as_ref().to_path_buf();
        move |source| Error::Io { path, source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
