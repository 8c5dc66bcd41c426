use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the reconstruction, evaluation and
/// classification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed header {path}: {message}")]
    Header { path: PathBuf, message: String },

    #[error("raster size mismatch: header declares {expected} bytes but raster holds {actual}")]
    SizeMismatch { expected: u64, actual: u64 },

    #[error("non-finite value in band {band} at pixel {index}")]
    NonFinite { band: usize, index: usize },

    #[error("unsupported {field} {value:?}")]
    Unsupported { field: &'static str, value: String },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("window out of bounds: {0}")]
    OutOfBounds(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("image of {width}x{height} is too small (minimum {min}x{min})")]
    TooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("malformed curvelet pyramid: {0}")]
    MalformedPyramid(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("image encoding failed: {0}")]
    Encode(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
