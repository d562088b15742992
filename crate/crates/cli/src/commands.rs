//! Subcommand definitions and their execution.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dirtda::decomp::{decompose, DecompositionJson};
use dirtda::homology::{persistence, rips_filtration, DEFAULT_MAX_DIM};
use dirtda::ingest::{default_labels, load_series};
use dirtda::pdc::{pdc_band, DEFAULT_BAND_GRID};
use dirtda::simulate::{realize, system_one, system_two};
use dirtda::summaries::{
    bottleneck, landscape, landscape_distance, shared_t_max, wasserstein, DEFAULT_LANDSCAPE_GRID,
    DEFAULT_LANDSCAPE_LEVELS,
};
use dirtda::var::{fit_var, select_order};
use dirtda::{DirectedNetwork, LandscapeNorm, OrderCriterion, PersistenceDiagram, VarModel};
use serde::Serialize;

use crate::config::{parse_band, PipelineConfig, WindowSpec, DEFAULT_K_MAX, DEFAULT_VAR_ORDER};
use crate::error::{CliError, CliResult};
use crate::pipeline::{run_pipeline, write_text, REPORT_FILE};
use crate::plot::{plot_diagram, plot_landscape};

/// Persistent homology of directed dependence in multivariate time series.
#[derive(Debug, Parser)]
#[command(name = "dirtda", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one of the two five-node AR(2)-driven test systems to CSV.
    Simulate(SimulateArgs),
    /// Fit a VAR model to a CSV recording.
    Fit(FitArgs),
    /// Band-averaged PDC network of a fitted VAR model.
    Pdc(PdcArgs),
    /// Symmetric/anti-symmetric decomposition of a network.
    Decompose(DecomposeArgs),
    /// Rips persistence diagram of the anti-symmetric distance.
    Persist(PersistArgs),
    /// Persistence landscape of one diagram dimension.
    Landscape(LandscapeArgs),
    /// Bottleneck, Wasserstein and landscape distances between two diagrams.
    Compare(CompareArgs),
    /// Full pipeline over every (window, band) pair.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Which system: 1 (with reciprocal links) or 2 (one-way cycle).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub system: u8,
    /// Number of samples after burn-in.
    #[arg(long = "t")]
    pub t: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sampling rate recorded with the series.
    #[arg(long, default_value_t = 1.0)]
    pub fs: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Sampling rate in Hz.
    #[arg(long)]
    pub fs: f64,
    /// Time window `start:end` in seconds.
    #[arg(long)]
    pub window: Option<String>,
    /// Skip per-channel z-scoring.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// VAR order; ignored when `--criterion` is given.
    #[arg(long, default_value_t = DEFAULT_VAR_ORDER)]
    pub order: usize,
    /// Select the order by information criterion (aic or bic).
    #[arg(long)]
    pub criterion: Option<OrderCriterion>,
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    pub k_max: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PdcArgs {
    /// VAR model JSON written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub fs: f64,
    /// Band as `name:low_hz:high_hz`.
    #[arg(long)]
    pub band: String,
    #[arg(long, default_value_t = DEFAULT_BAND_GRID)]
    pub n_grid: usize,
    /// Comma-separated channel labels (default ch1..chd).
    #[arg(long)]
    pub labels: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Network JSON written by `pdc`.
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PersistArgs {
    /// Decomposition JSON written by `decompose`.
    #[arg(long)]
    pub decomposition: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
    pub max_dim: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write an SVG plot of the diagram.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    #[arg(long)]
    pub diagram: PathBuf,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = DEFAULT_LANDSCAPE_LEVELS)]
    pub levels: usize,
    #[arg(long, default_value_t = DEFAULT_LANDSCAPE_GRID)]
    pub grid: usize,
    /// Right end of the grid (default 1.05 times the largest finite death).
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Dimensions to compare (default 0, 1 and 2).
    #[arg(long, value_delimiter = ',')]
    pub dim: Vec<usize>,
    /// Wasserstein exponent.
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, default_value_t = DEFAULT_LANDSCAPE_LEVELS)]
    pub levels: usize,
    #[arg(long, default_value_t = DEFAULT_LANDSCAPE_GRID)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat JSON configuration; flags below override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub fs: Option<f64>,
    /// Window `[name=]start:end` in seconds; repeat for several windows.
    #[arg(long)]
    pub window: Vec<String>,
    /// Band `name:low_hz:high_hz`; repeat for several bands.
    #[arg(long)]
    pub band: Vec<String>,
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub criterion: Option<OrderCriterion>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub n_grid: Option<usize>,
    #[arg(long)]
    pub max_dim: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    /// Loads the config file, if any, and applies the overrides.
    pub fn to_config(&self) -> CliResult<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = &self.input {
            cfg.input = Some(v.clone());
        }
        if let Some(v) = self.fs {
            cfg.sampling_rate_hz = Some(v);
        }
        if !self.window.is_empty() {
            cfg.windows = self
                .window
                .iter()
                .enumerate()
                .map(|(i, w)| WindowSpec::parse(w, i))
                .collect::<CliResult<_>>()?;
        }
        if !self.band.is_empty() {
            cfg.bands = self
                .band
                .iter()
                .map(|b| parse_band(b))
                .collect::<CliResult<_>>()?;
        }
        if self.no_standardize {
            cfg.standardize = false;
        }
        if let Some(v) = self.order {
            cfg.var_order = v;
            cfg.order_criterion = None;
        }
        if let Some(v) = self.criterion {
            cfg.order_criterion = Some(v);
        }
        if let Some(v) = self.k_max {
            cfg.k_max = v;
        }
        if let Some(v) = self.n_grid {
            cfg.n_grid = v;
        }
        if let Some(v) = self.max_dim {
            cfg.max_dim = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        Ok(cfg)
    }
}

/// How a successful invocation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The pipeline finished but some cells failed.
    PartialFailure,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Success => 0,
            Self::PartialFailure => 2,
        }
    }
}

pub fn execute(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Fit(a) => fit(&a),
        Command::Pdc(a) => pdc(&a),
        Command::Decompose(a) => decompose_cmd(&a),
        Command::Persist(a) => persist(&a),
        Command::Landscape(a) => landscape_cmd(&a),
        Command::Compare(a) => compare(&a),
        Command::Run(a) => run(&a),
    }
    .inspect(|o| {
        if let Outcome::PartialFailure = o {
            eprintln!("some (window, band) cells failed; see {REPORT_FILE}");
        }
    })
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn simulate(a: &SimulateArgs) -> CliResult<Outcome> {
    let sys = if a.system == 1 {
        system_one()
    } else {
        system_two()
    };
    let series = realize(&sys, a.t, a.seed)?.with_sampling_rate(a.fs)?;
    series.save(&a.out)?;
    Ok(Outcome::Success)
}

fn fit(a: &FitArgs) -> CliResult<Outcome> {
    let s = &a.series;
    let mut series = load_series(&s.input, s.fs)?;
    if let Some(w) = &s.window {
        let w = WindowSpec::parse(w, 0)?;
        series = series.segment(w.start_sec, w.end_sec)?;
    }
    if !s.no_standardize {
        series = series.standardize()?;
    }
    let k = match a.criterion {
        Some(c) => select_order(&series, a.k_max, c)?,
        None => a.order,
    };
    let model = fit_var(&series, k)?;
    write_text(&a.out, &model.to_json()?)?;
    Ok(Outcome::Success)
}

fn pdc(a: &PdcArgs) -> CliResult<Outcome> {
    let model = VarModel::from_json(&read_text(&a.model)?)?;
    let band = parse_band(&a.band)?;
    let labels = match &a.labels {
        Some(l) => l.split(',').map(|s| s.trim().to_string()).collect(),
        None => default_labels(model.dim()),
    };
    let net = pdc_band(&model, &band, a.fs, a.n_grid, &labels)?;
    write_text(&a.out, &net.to_json()?)?;
    Ok(Outcome::Success)
}

fn decompose_cmd(a: &DecomposeArgs) -> CliResult<Outcome> {
    let net = DirectedNetwork::from_json(&read_text(&a.network)?)?;
    let dec = DecompositionJson::new(&decompose(&net));
    let text = serde_json::to_string(&dec).map_err(|source| CliError::Json {
        path: a.out.clone(),
        source,
    })?;
    write_text(&a.out, &text)?;
    Ok(Outcome::Success)
}

fn persist(a: &PersistArgs) -> CliResult<Outcome> {
    let text = read_text(&a.decomposition)?;
    let dec: DecompositionJson<f64> =
        serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: a.decomposition.clone(),
            source,
        })?;
    let pd = persistence(&rips_filtration(&dec.distance()?, a.max_dim)?);
    write_text(&a.out, &pd.to_json()?)?;
    if let Some(svg) = &a.svg {
        plot_diagram(&pd, svg)?;
    }
    Ok(Outcome::Success)
}

fn landscape_cmd(a: &LandscapeArgs) -> CliResult<Outcome> {
    let pd = PersistenceDiagram::from_json(&read_text(&a.diagram)?)?;
    let t_max = a.t_max.unwrap_or_else(|| shared_t_max([&pd]));
    let l = landscape(&pd, a.dim, a.levels, a.grid, t_max)?;
    write_text(&a.out, &l.to_json()?)?;
    if let Some(svg) = &a.svg {
        plot_landscape(&l, svg)?;
    }
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct DimDistances {
    dim: usize,
    #[serde(serialize_with = "inf_as_text")]
    bottleneck: f64,
    #[serde(serialize_with = "inf_as_text")]
    wasserstein: f64,
    landscape_l2: f64,
}

fn inf_as_text<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn compare(a: &CompareArgs) -> CliResult<Outcome> {
    let x = PersistenceDiagram::from_json(&read_text(&a.a)?)?;
    let y = PersistenceDiagram::from_json(&read_text(&a.b)?)?;
    let dims = if a.dim.is_empty() {
        vec![0, 1, 2]
    } else {
        a.dim.clone()
    };
    let t_max = shared_t_max([&x, &y]);
    let mut rows = Vec::new();
    for dim in dims {
        let lx = landscape(&x, dim, a.levels, a.grid, t_max)?;
        let ly = landscape(&y, dim, a.levels, a.grid, t_max)?;
        rows.push(DimDistances {
            dim,
            bottleneck: bottleneck(&x, &y, dim),
            wasserstein: wasserstein(&x, &y, dim, a.q)?,
            landscape_l2: landscape_distance(&lx, &ly, LandscapeNorm::L2)?,
        });
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&rows).expect("plain numbers serialize")
    );
    Ok(Outcome::Success)
}

fn run(a: &RunArgs) -> CliResult<Outcome> {
    let report = run_pipeline(&a.to_config()?)?;
    for c in report.cells.iter().filter(|c| c.error.is_some()) {
        eprintln!("failed: {}", c.error.as_deref().unwrap_or_default());
    }
    Ok(if report.failures > 0 {
        Outcome::PartialFailure
    } else {
        Outcome::Success
    })
}
