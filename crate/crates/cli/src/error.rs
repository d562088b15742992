use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] dirtda::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid window {0:?}, expected [name=]start:end in seconds")]
    WindowSpec(String),

    #[error("invalid band {0:?}, expected name:low_hz:high_hz")]
    BandSpec(String),

    #[error("{0} must be a positive integer, got {1:?}")]
    ThreadCount(&'static str, String),

    #[error("cannot start worker threads: {0}")]
    ThreadPool(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;
