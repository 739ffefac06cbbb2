use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {message}")]
    Csv { path: PathBuf, row: u64, message: String },

    #[error("invalid series: {0}")]
    Series(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid {field}: {message}")]
    InvalidArgument { field: &'static str, message: String },

    #[error("non-finite training loss at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("split {split}: {source}")]
    Split {
        split: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field,
            message: message.into(),
        }
    }

    pub(crate) fn dim(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            actual,
        }
    }

    /// True for failures that arise during numerical work rather than from
    /// bad inputs or configuration.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Diverged { .. } => true,
            Error::Split { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
