use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::losskernel::LossError;
use crate::markup::MarkupError;
use crate::taggers::TaggerError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{origin}:{line}: {message}")]
    Schema {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("{origin}:{line}: duplicate id {id:?}")]
    DuplicateId {
        origin: String,
        line: usize,
        id: String,
    },

    #[error(transparent)]
    Markup(#[from] MarkupError),

    #[error(transparent)]
    Tagger(#[from] TaggerError),

    #[error(transparent)]
    Loss(#[from] LossError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Validation(String),
}

impl Error {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    /// Process exit code: 2 for IO failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::Tagger(TaggerError::BackendUnavailable { .. }) => 2,
            _ => 1,
        }
    }
}
