use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("spectra do not share a wavelength grid")]
    GridMismatch,

    #[error("degenerate input{}: {reason}", context.as_ref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Degenerate {
        reason: String,
        context: Option<String>,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("repetition {index}: {source}")]
    Repetition {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

/// Broad failure category, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Io,
    Numerical,
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn degenerate(reason: impl Into<String>) -> Self {
        Error::Degenerate {
            reason: reason.into(),
            context: None,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a context label (e.g. the offending sample id) to a degenerate-input error.
    pub fn with_context(self, ctx: impl Into<String>) -> Self {
        match self {
            Error::Degenerate { reason, .. } => Error::Degenerate {
                reason,
                context: Some(ctx.into()),
            },
            other => other,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::Numerical(_) => ErrorKind::Numerical,
            Error::Repetition { source, .. } => source.kind(),
            _ => ErrorKind::Input,
        }
    }
}
