//! The full analysis: for every (window, band) cell fit a VAR on the window,
//! average PDC over the band, decompose, and run persistence on `|W_a|`.

use std::fs;
use std::path::{Path, PathBuf};

use dirtda::decomp::{asym_distance, decompose, DecompositionJson};
use dirtda::homology::{persistence, rips_filtration};
use dirtda::ingest::load_series;
use dirtda::pdc::pdc_band;
use dirtda::summaries::{bottleneck, landscape, landscape_distance, shared_t_max, wasserstein};
use dirtda::var::{fit_var, select_order};
use dirtda::{
    DirectedNetwork, LandscapeNorm, MultivariateSeries, NetworkDecomposition, PersistenceDiagram,
    PersistenceLandscape, VarModel,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{file_stem, PipelineConfig, WindowSpec};
use crate::error::{CliError, CliResult};
use crate::plot::{plot_diagram, plot_landscape};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "DIRTDA_THREADS";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub name: String,
    pub start_sec: f64,
    pub end_sec: f64,
    pub rows: Option<usize>,
    pub var_order: Option<usize>,
    pub spectral_radius: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub window: String,
    pub band: String,
    pub error: Option<String>,
    /// Number of diagram pairs per dimension `0..=max_dim`.
    pub pairs: Vec<usize>,
    /// Total finite persistence per dimension `0..=max_dim`.
    pub total_persistence: Vec<f64>,
    /// Artifact paths relative to the output directory.
    pub artifacts: Vec<String>,
}

/// Distances between the diagrams of two windows in one band, one entry per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub band: String,
    pub window_a: String,
    pub window_b: String,
    #[serde(with = "extended_floats")]
    pub bottleneck: Vec<f64>,
    #[serde(with = "extended_floats")]
    pub wasserstein: Vec<f64>,
    pub landscape_l2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub config: PipelineConfig,
    pub windows: Vec<WindowReport>,
    pub cells: Vec<CellReport>,
    pub comparisons: Vec<Comparison>,
    /// Number of failed cells.
    pub failures: usize,
}

impl AnalysisReport {
    pub fn cell(&self, window: &str, band: &str) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.window == window && c.band == band)
    }
}

/// Floats that may be `+∞`, written as the string `"inf"`.
mod extended_floats {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Value {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|&x| {
                if x.is_infinite() {
                    Value::Text("inf".into())
                } else {
                    Value::Number(x)
                }
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Value>::deserialize(d)?
            .into_iter()
            .map(|v| match v {
                Value::Number(x) => Ok(x),
                Value::Text(t) if t == "inf" => Ok(f64::INFINITY),
                Value::Text(t) => Err(serde::de::Error::custom(format!(
                    "expected a number or \"inf\", got {t:?}"
                ))),
            })
            .collect()
    }
}

/// Worker count from [`THREADS_ENV`], or `None` for the rayon default.
pub fn thread_limit() -> CliResult<Option<usize>> {
    parse_thread_limit(std::env::var(THREADS_ENV).ok())
}

pub fn parse_thread_limit(value: Option<String>) -> CliResult<Option<usize>> {
    match value {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::ThreadCount(THREADS_ENV, v)),
        },
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_limit()? {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::ThreadPool(e.to_string()))
}

/// Window preprocessing and the fitted model.
struct WindowFit {
    series: MultivariateSeries,
    model: VarModel,
}

fn fit_window(
    series: &MultivariateSeries,
    w: &WindowSpec,
    cfg: &PipelineConfig,
) -> dirtda::Result<WindowFit> {
    let mut s = series.segment(w.start_sec, w.end_sec)?;
    if cfg.standardize {
        s = s.standardize()?;
    }
    let k = match cfg.order_criterion {
        Some(crit) => select_order(&s, cfg.k_max, crit)?,
        None => cfg.var_order,
    };
    let model = fit_var(&s, k)?;
    Ok(WindowFit { series: s, model })
}

/// Everything computed for one (window, band) cell.
pub struct CellOutput {
    pub network: DirectedNetwork,
    pub decomposition: NetworkDecomposition,
    pub diagram: PersistenceDiagram,
    pub landscapes: Vec<PersistenceLandscape>,
}

fn analyse_cell(
    fit: &WindowFit,
    band: &dirtda::FrequencyBand,
    cfg: &PipelineConfig,
) -> dirtda::Result<CellOutput> {
    let fs = fit.series.sampling_rate_hz();
    let network = pdc_band(&fit.model, band, fs, cfg.n_grid, fit.series.labels())?;
    let decomposition = decompose(&network);
    let filtration = rips_filtration(&asym_distance(&decomposition), cfg.max_dim)?;
    Ok(CellOutput {
        network,
        decomposition,
        diagram: persistence(&filtration),
        landscapes: Vec::new(),
    })
}

fn with_context<T>(r: dirtda::Result<T>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

/// Runs the pipeline and writes every artifact under `cfg.output_dir`.
///
/// Configuration, input and output-directory problems are returned as errors;
/// failures inside a (window, band) cell are recorded in the report instead.
pub fn run_pipeline(cfg: &PipelineConfig) -> CliResult<AnalysisReport> {
    cfg.validate()?;
    let input = cfg.input.as_deref().expect("validated");
    let fs = cfg.sampling_rate_hz.expect("validated");
    let series = load_series(input, fs)?;

    let windows = if cfg.windows.is_empty() {
        vec![WindowSpec {
            name: "full".into(),
            start_sec: 0.0,
            end_sec: series.duration_sec(),
        }]
    } else {
        cfg.windows.clone()
    };

    let pool = thread_pool()?;
    let fits: Vec<Result<WindowFit, String>> = pool.install(|| {
        windows
            .par_iter()
            .map(|w| with_context(fit_window(&series, w, cfg), &format!("window {:?}", w.name)))
            .collect()
    });

    let n_bands = cfg.bands.len();
    let mut outputs: Vec<Result<CellOutput, String>> = pool.install(|| {
        (0..windows.len() * n_bands)
            .into_par_iter()
            .map(|i| {
                let (wi, bi) = (i / n_bands, i % n_bands);
                let fit = fits[wi].as_ref().map_err(Clone::clone)?;
                let band = &cfg.bands[bi];
                with_context(
                    analyse_cell(fit, band, cfg),
                    &format!("window {:?}, band {:?}", windows[wi].name, band.name),
                )
            })
            .collect()
    });

    // Landscapes of one band share a truncation point so they can be compared.
    for bi in 0..n_bands {
        let t_max = shared_t_max(
            (0..windows.len())
                .filter_map(|wi| outputs[wi * n_bands + bi].as_ref().ok().map(|c| &c.diagram)),
        );
        for wi in 0..windows.len() {
            let slot = &mut outputs[wi * n_bands + bi];
            if let Ok(cell) = slot {
                let ls: dirtda::Result<Vec<_>> = (0..=cfg.max_dim)
                    .map(|dim| {
                        landscape(
                            &cell.diagram,
                            dim,
                            cfg.landscape_levels,
                            cfg.landscape_grid,
                            t_max,
                        )
                    })
                    .collect();
                match ls {
                    Ok(ls) => cell.landscapes = ls,
                    Err(e) => {
                        *slot = Err(format!(
                            "window {:?}, band {:?}: {e}",
                            windows[wi].name, cfg.bands[bi].name
                        ))
                    }
                }
            }
        }
    }

    let mut comparisons = Vec::new();
    for (bi, band) in cfg.bands.iter().enumerate() {
        for a in 0..windows.len() {
            for b in a + 1..windows.len() {
                let (Ok(x), Ok(y)) = (&outputs[a * n_bands + bi], &outputs[b * n_bands + bi])
                else {
                    continue;
                };
                comparisons.push(compare_cells(
                    x,
                    y,
                    cfg,
                    &band.name,
                    &windows[a].name,
                    &windows[b].name,
                )?);
            }
        }
    }

    let out_dir = &cfg.output_dir;
    create_dir(out_dir)?;
    let mut window_reports = Vec::with_capacity(windows.len());
    for (w, fit) in windows.iter().zip(&fits) {
        let mut report = WindowReport {
            name: w.name.clone(),
            start_sec: w.start_sec,
            end_sec: w.end_sec,
            rows: None,
            var_order: None,
            spectral_radius: None,
            error: None,
        };
        match fit {
            Ok(fit) => {
                let dir = out_dir.join(file_stem(&w.name));
                create_dir(&dir)?;
                write_text(&dir.join("var_model.json"), &fit.model.to_json()?)?;
                report.rows = Some(fit.series.len());
                report.var_order = Some(fit.model.order());
                report.spectral_radius = fit.model.spectral_radius();
            }
            Err(e) => report.error = Some(e.clone()),
        }
        window_reports.push(report);
    }

    let mut cells = Vec::with_capacity(outputs.len());
    for (i, out) in outputs.iter().enumerate() {
        let (w, band) = (&windows[i / n_bands], &cfg.bands[i % n_bands]);
        let mut cell = CellReport {
            window: w.name.clone(),
            band: band.name.clone(),
            error: None,
            pairs: Vec::new(),
            total_persistence: Vec::new(),
            artifacts: Vec::new(),
        };
        match out {
            Ok(out) => {
                cell.pairs = (0..=cfg.max_dim)
                    .map(|d| out.diagram.dim_pairs(d).count())
                    .collect();
                cell.total_persistence = (0..=cfg.max_dim)
                    .map(|d| out.diagram.total_persistence(d))
                    .collect();
                cell.artifacts =
                    write_cell(out_dir, &file_stem(&w.name), &file_stem(&band.name), out)?;
            }
            Err(e) => cell.error = Some(e.clone()),
        }
        cells.push(cell);
    }

    let report = AnalysisReport {
        config: cfg.clone(),
        failures: cells.iter().filter(|c| c.error.is_some()).count(),
        windows: window_reports,
        cells,
        comparisons,
    };
    let text = serde_json::to_string_pretty(&report).map_err(|source| CliError::Json {
        path: out_dir.join(REPORT_FILE),
        source,
    })?;
    write_text(&out_dir.join(REPORT_FILE), &text)?;
    Ok(report)
}

fn compare_cells(
    x: &CellOutput,
    y: &CellOutput,
    cfg: &PipelineConfig,
    band: &str,
    a: &str,
    b: &str,
) -> CliResult<Comparison> {
    let dims = 0..=cfg.max_dim;
    Ok(Comparison {
        band: band.to_string(),
        window_a: a.to_string(),
        window_b: b.to_string(),
        bottleneck: dims
            .clone()
            .map(|d| bottleneck(&x.diagram, &y.diagram, d))
            .collect(),
        wasserstein: dims
            .clone()
            .map(|d| wasserstein(&x.diagram, &y.diagram, d, cfg.wasserstein_q))
            .collect::<dirtda::Result<_>>()?,
        landscape_l2: dims
            .map(|d| landscape_distance(&x.landscapes[d], &y.landscapes[d], LandscapeNorm::L2))
            .collect::<dirtda::Result<_>>()?,
    })
}

fn write_cell(
    out_dir: &Path,
    window: &str,
    band: &str,
    out: &CellOutput,
) -> CliResult<Vec<String>> {
    let rel = PathBuf::from(window).join(band);
    let dir = out_dir.join(&rel);
    create_dir(&dir)?;
    let mut written = Vec::new();
    let mut emit = |name: String, text: String| -> CliResult<()> {
        write_text(&dir.join(&name), &text)?;
        written.push(format!("{window}/{band}/{name}"));
        Ok(())
    };
    emit("network.json".into(), out.network.to_json()?)?;
    let dec = serde_json::to_string(&DecompositionJson::new(&out.decomposition))
        .map_err(dirtda::Error::from)?;
    emit("decomposition.json".into(), dec)?;
    emit("diagram.json".into(), out.diagram.to_json()?)?;
    for l in &out.landscapes {
        emit(format!("landscape_h{}.json", l.dim()), l.to_json()?)?;
    }
    plot_diagram(&out.diagram, &dir.join("diagram.svg"))?;
    written.push(format!("{window}/{band}/diagram.svg"));
    for l in &out.landscapes {
        let name = format!("landscape_h{}.svg", l.dim());
        plot_landscape(l, &dir.join(&name))?;
        written.push(format!("{window}/{band}/{name}"));
    }
    Ok(written)
}

pub(crate) fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
