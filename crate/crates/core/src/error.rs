use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: empty file (no data rows)")]
    EmptyFile { path: PathBuf },

    #[error("{path}: row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a number")]
    ParseCell {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid window spec: {0}")]
    InvalidWindowSpec(String),

    #[error("series of length {len} is too short for input_len {input_len} + output_len {output_len}")]
    SeriesTooShort {
        len: usize,
        input_len: usize,
        output_len: usize,
    },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error(
        "pooled covariance is numerically singular (condition estimate {condition:.3e}); \
         increase the ridge term"
    )]
    SingularCovariance { condition: f64 },

    #[error("period of {period} samples exceeds coverage of {coverage} samples")]
    InsufficientCoverage { period: usize, coverage: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("weight column {dim} is all zero")]
    ZeroWeightColumn { dim: usize },

    #[error("weights misaligned with windows: {0}")]
    Misaligned(String),

    #[error("training diverged at epoch {epoch}, batch {batch} (loss = {loss})")]
    Diverged { epoch: usize, batch: usize, loss: f64 },

    #[error("overlapping events at index {index}")]
    OverlappingEvents { index: usize },

    #[error("model file: {0}")]
    ModelFormat(String),
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
