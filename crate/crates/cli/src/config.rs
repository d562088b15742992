//! Pipeline configuration: one flat JSON document, every key optional.

use std::fs;
use std::path::{Path, PathBuf};

use dirtda::homology::DEFAULT_MAX_DIM;
use dirtda::pdc::DEFAULT_BAND_GRID;
use dirtda::summaries::{DEFAULT_LANDSCAPE_GRID, DEFAULT_LANDSCAPE_LEVELS};
use dirtda::{FrequencyBand, OrderCriterion};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_VAR_ORDER: usize = 5;
pub const DEFAULT_K_MAX: usize = 10;
pub const DEFAULT_OUTPUT_DIR: &str = "dirtda-out";

/// A named analysis window `[start_sec, end_sec)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub name: String,
    pub start_sec: f64,
    pub end_sec: f64,
}

impl WindowSpec {
    /// Parses `[name=]start:end`; unnamed windows are called `w<index>`.
    pub fn parse(spec: &str, index: usize) -> CliResult<Self> {
        let bad = || CliError::WindowSpec(spec.to_string());
        let (name, range) = match spec.split_once('=') {
            Some((n, r)) if !n.trim().is_empty() => (n.trim().to_string(), r),
            Some(_) => return Err(bad()),
            None => (format!("w{index}"), spec),
        };
        let (a, b) = range.split_once(':').ok_or_else(bad)?;
        let start_sec: f64 = a.trim().parse().map_err(|_| bad())?;
        let end_sec: f64 = b.trim().parse().map_err(|_| bad())?;
        Ok(Self {
            name,
            start_sec,
            end_sec,
        })
    }
}

/// Parses `name:low_hz:high_hz`.
pub fn parse_band(spec: &str) -> CliResult<FrequencyBand> {
    let bad = || CliError::BandSpec(spec.to_string());
    let parts: Vec<&str> = spec.split(':').collect();
    let [name, lo, hi] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    FrequencyBand::new(name.trim(), lo, hi).map_err(|_| bad())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub sampling_rate_hz: Option<f64>,
    /// Empty means one window named `full` spanning the recording.
    pub windows: Vec<WindowSpec>,
    /// Fixed VAR order; ignored when `order_criterion` is set.
    pub var_order: usize,
    pub order_criterion: Option<OrderCriterion>,
    pub k_max: usize,
    pub bands: Vec<FrequencyBand>,
    pub n_grid: usize,
    pub max_dim: usize,
    pub landscape_levels: usize,
    pub landscape_grid: usize,
    pub wasserstein_q: f64,
    pub standardize: bool,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            sampling_rate_hz: None,
            windows: Vec::new(),
            var_order: DEFAULT_VAR_ORDER,
            order_criterion: None,
            k_max: DEFAULT_K_MAX,
            bands: FrequencyBand::eeg_defaults(),
            n_grid: DEFAULT_BAND_GRID,
            max_dim: DEFAULT_MAX_DIM,
            landscape_levels: DEFAULT_LANDSCAPE_LEVELS,
            landscape_grid: DEFAULT_LANDSCAPE_GRID,
            wasserstein_q: 1.0,
            standardize: true,
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Checks everything that can be checked without reading the recording.
    pub fn validate(&self) -> CliResult<()> {
        let err = |m: String| Err(CliError::Config(m));
        if self.input.is_none() {
            return err("no input recording given".into());
        }
        match self.sampling_rate_hz {
            Some(fs) if fs > 0.0 && fs.is_finite() => {}
            other => return err(format!("sampling_rate_hz must be positive, got {other:?}")),
        }
        if self.bands.is_empty() {
            return err("at least one band is required".into());
        }
        if self.var_order == 0 || self.k_max == 0 {
            return err("var_order and k_max must be at least 1".into());
        }
        if self.n_grid == 0 || self.landscape_levels == 0 || self.landscape_grid == 0 {
            return err("n_grid, landscape_levels and landscape_grid must be positive".into());
        }
        if !matches!(self.max_dim, 1 | 2) {
            return err(format!("max_dim must be 1 or 2, got {}", self.max_dim));
        }
        if !self.wasserstein_q.is_finite() || self.wasserstein_q < 1.0 {
            return err(format!(
                "wasserstein_q must be a finite value >= 1, got {}",
                self.wasserstein_q
            ));
        }
        check_unique("window", self.windows.iter().map(|w| w.name.as_str()))?;
        check_unique("band", self.bands.iter().map(|b| b.name.as_str()))?;
        Ok(())
    }
}

fn check_unique<'a>(what: &str, names: impl Iterator<Item = &'a str>) -> CliResult<()> {
    let mut seen: Vec<String> = Vec::new();
    for n in names {
        let key = file_stem(n);
        if seen.contains(&key) {
            return Err(CliError::Config(format!("duplicate {what} name {n:?}")));
        }
        seen.push(key);
    }
    Ok(())
}

/// File-system safe version of a window or band name.
pub fn file_stem(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}
