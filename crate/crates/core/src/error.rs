use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("cell at row {row}, column {column} is not a finite number: {value:?}")]
    BadCell {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid time window [{start}, {end}) s for a recording of {duration} s")]
    InvalidWindow { start: f64, end: f64, duration: f64 },

    #[error("channel {label:?} has zero variance")]
    ConstantChannel { label: String },

    #[error("need more than {needed} observations to fit VAR({order}) on {channels} channels, got {available}")]
    InsufficientData {
        order: usize,
        channels: usize,
        needed: usize,
        available: usize,
    },

    #[error("regressor matrix is numerically singular (condition estimate {condition:e})")]
    SingularRegressors { condition: f64 },

    #[error("innovation covariance is not positive definite")]
    DegenerateCovariance,

    #[error("VAR model is not stable (spectral radius {spectral_radius})")]
    Unstable { spectral_radius: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("PDC column {column} has zero norm at normalized frequency {omega}")]
    ZeroColumnNorm { column: usize, omega: f64 },

    #[error("band {name:?} [{low_hz}, {high_hz}] Hz is invalid for sampling rate {fs_hz} Hz")]
    InvalidBand {
        name: String,
        low_hz: f64,
        high_hz: f64,
        fs_hz: f64,
    },

    #[error("matrix must be square and finite: {0}")]
    InvalidMatrix(String),

    #[error("candidate matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("max homology dimension must be 1 or 2, got {0}")]
    InvalidMaxDim(usize),

    #[error("landscapes are not comparable: {0}")]
    LandscapeMismatch(String),

    #[error("invalid landscape parameters: {0}")]
    InvalidLandscape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
