//! Crate-wide error type.

use crate::timeseries::Resolution;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("resolution mismatch: {left} vs {right}")]
    ResolutionMismatch { left: Resolution, right: Resolution },

    #[error("resolution {actual} is not finer than target {target}")]
    ResolutionNotFiner {
        actual: Resolution,
        target: Resolution,
    },

    #[error("empty series")]
    EmptySeries,

    #[error("column for `{0}` missing from header")]
    MissingColumn(String),

    #[error("schema: {0}")]
    Schema(String),

    #[error("unparseable timestamp `{0}`")]
    Timestamp(String),

    #[error("invalid bin bounds: lower={lower} upper={upper}")]
    InvalidBinBounds { lower: f64, upper: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least {needed} overlapping points, found {found}")]
    InsufficientOverlap { needed: usize, found: usize },

    #[error("need at least {needed} samples, found {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("metric inputs must be equal-length and non-empty (got {left} and {right})")]
    MetricLength { left: usize, right: usize },

    #[error("cannot fit scaler: {0}")]
    ScalerFit(String),

    #[error("only horizon 1 is supported, got {0}")]
    UnsupportedHorizon(usize),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("insufficient contiguous data: need at least {needed} consecutive points, longest run is {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged { epoch: usize },

    #[error("model file format: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
