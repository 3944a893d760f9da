use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    #[error("frame {index} of sequence '{sequence}': {reason}")]
    FrameRead {
        sequence: String,
        index: usize,
        reason: String,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("sequence '{sequence}': {message}")]
    Dataset { sequence: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: {source}", path.display())]
    ImageFile {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("sequence too short: {len} frames, need at least {need}")]
    SequenceTooShort { len: usize, need: usize },

    #[error("sampling failed after {0} draws")]
    SamplingFailure(usize),

    #[error("invalid motion spec: {0}")]
    SpecInvalid(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InvalidState(_) => "invalid-state",
            Error::UnsupportedMode(_) => "unsupported-mode",
            Error::FrameRead { .. } => "frame-read",
            Error::Parse { .. } => "parse",
            Error::Dataset { .. } => "dataset",
            Error::Io { .. } => "io",
            Error::ImageFile { .. } => "image",
            Error::SequenceTooShort { .. } => "sequence-too-short",
            Error::SamplingFailure(_) => "sampling-failure",
            Error::SpecInvalid(_) => "spec-invalid",
            Error::Config(_) => "config",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
