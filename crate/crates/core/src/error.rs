use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument `{arg}`: {reason}")]
    InvalidArgument { arg: &'static str, reason: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("unsupported audio format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("malformed audio file {path}: {reason}")]
    MalformedAudio { path: PathBuf, reason: String },

    #[error("sample-rate mismatch: {left} Hz vs {right} Hz")]
    SampleRateMismatch { left: u32, right: u32 },

    #[error("backend error: {0}")]
    Backend(String),

    #[error("item {index}: {source}")]
    AtItem {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(arg: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            arg,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at(index: usize, source: Error) -> Self {
        Error::AtItem {
            index,
            source: Box::new(source),
        }
    }

    /// True when the root cause is a scoring-backend failure.
    pub fn is_backend(&self) -> bool {
        match self {
            Error::Backend(_) => true,
            Error::AtItem { source, .. } => source.is_backend(),
            _ => false,
        }
    }

    /// True when the root cause is a caller mistake rather than bad data.
    pub fn is_invalid_argument(&self) -> bool {
        match self {
            Error::InvalidArgument { .. } => true,
            Error::AtItem { source, .. } => source.is_invalid_argument(),
            _ => false,
        }
    }
}
