use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty mask: {0}")]
    EmptyMask(&'static str),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("expected {expected}-channel image, found {found} channels")]
    ChannelMismatch { expected: usize, found: usize },

    #[error("invalid thresholds: low={low}, high={high} (need 0 <= low <= high <= 1)")]
    BadThresholds { low: f64, high: f64 },

    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("loss term `{0}` is missing")]
    MissingTerm(String),

    #[error("loss signal must be non-negative, got {0}")]
    NegativeLoss(f64),

    #[error("sample pool is empty")]
    EmptyDataset,

    #[error("ground truth has no valid (non-uncertain) pixels")]
    NoValidPixels,

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("missing input: {0}")]
    MissingInput(String),
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::ShapeMismatch { expected: expected.to_string(), found: found.to_string() }
    }
}
