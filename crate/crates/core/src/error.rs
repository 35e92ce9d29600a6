use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input shape is outside its valid range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input data could not be read into a point cloud.
    #[error("{path}: line {line}: {message}")]
    Ingestion {
        path: PathBuf,
        line: u64,
        message: String,
    },

    /// A deformation step produced a non-finite coordinate.
    #[error("deformation diverged at step {step}: non-finite coordinate at point {point}")]
    Divergence { step: usize, point: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
