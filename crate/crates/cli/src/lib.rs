//! Command-line pipeline around the `dirtda` library: configuration, the
//! parallel (window, band) analysis, JSON reports and SVG plots.

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod plot;

pub use config::{PipelineConfig, WindowSpec};
pub use error::{CliError, CliResult};
pub use pipeline::{run_pipeline, AnalysisReport};
