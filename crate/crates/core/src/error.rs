use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum RrpError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An environment was stepped after its episode had terminated.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Every violated field of an experiment configuration, in declaration order.
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl RrpError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        RrpError::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RrpError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = RrpError> = std::result::Result<T, E>;
