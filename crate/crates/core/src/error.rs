use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image is {width}x{height}; both dimensions must be at least 8")]
    DimensionTooSmall { width: usize, height: usize },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("beta {beta} outside admissible range [{min}, {max}]")]
    OutOfRange { beta: f64, min: f64, max: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("netpbm: {0}")]
    Pnm(String),

    #[error("BD-rate needs at least 4 points per curve, got {0}")]
    InsufficientPoints(usize),

    #[error("quality ranges of the two curves do not overlap")]
    EmptyOverlap,

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
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
