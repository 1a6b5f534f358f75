use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// An argument outside the domain of an operation (bad fraction, dimension
    /// mismatch, zero vector, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A referenced tweet or hashtag is missing from the artifact that should
    /// hold it.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("missing input {path} (run `{stage}` first)")]
    MissingArtifact { path: PathBuf, stage: &'static str },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(
        path: impl Into<PathBuf>,
        line: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. }
            | Error::Format { .. }
            | Error::Domain(_)
            | Error::MissingArtifact { .. } => 2,
            Error::Integrity(_) => 3,
            Error::Degenerate(_) => 4,
        }
    }
}
