use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
///
/// `Config` covers anything the user can fix by editing the config file or
/// command line (exit code 1 in the CLI); every other variant is reported as
/// an internal failure (exit code 2).
#[derive(Error, Debug)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("lda fit failed (corpus {corpus_id}, K={k}, run {run_id}): {source}")]
    Fit {
        corpus_id: usize,
        k: usize,
        run_id: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code mandated for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
