use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("window {m}x{n} does not fit in {rows}x{cols} signal")]
    WindowTooLarge {
        m: usize,
        n: usize,
        rows: usize,
        cols: usize,
    },

    #[error("brute-force oracle limited to 16x16 signals, got {rows}x{cols}")]
    OracleTooLarge { rows: usize, cols: usize },

    #[error("matrix is not positive definite after jitter")]
    NotPositiveDefinite,

    #[error("bounding box outside frame: {0}")]
    BoxOutsideFrame(String),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("frame {index}: {source}")]
    Frame {
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

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
