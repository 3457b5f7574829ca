use std::path::PathBuf;

use thiserror::Error;

use crate::pattern::PatternKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed bytes: bad magic, unparsable header, truncated payload.
    #[error("format error: {0}")]
    Format(String),

    /// Well-formed data that violates a domain invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Feature schema of the input does not match the one a model was trained on.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("training data contains a single class only")]
    SingleClass,

    #[error("pattern {0:?} is absent: no anchor indices in sample metadata")]
    AbsentPattern(PatternKind),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Format(_) => 2,
            Error::Schema(_) => 3,
            Error::Io { .. } => 4,
            _ => 1,
        }
    }
}
