//! Loading, windowing and z-scoring of multivariate recordings.
//!
//! The on-disk format is plain UTF-8 CSV: one row per time point, one column
//! per channel, with an optional single header row of channel labels. A first
//! row is treated as a header only when none of its cells parses as a number.

use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// `T × d` samples (rows are time points) with a sampling rate and channel labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries<T> {
    samples: Matrix<T>,
    sampling_rate_hz: T,
    labels: Vec<String>,
}

impl<T: Scalar> MultivariateSeries<T> {
    /// Validates and wraps a sample matrix.
    pub fn new(samples: Matrix<T>, sampling_rate_hz: T, labels: Vec<String>) -> Result<Self> {
        if samples.nrows() == 0 || samples.ncols() == 0 {
            return Err(Error::InvalidSeries(format!(
                "need at least one row and one column, got {}x{}",
                samples.nrows(),
                samples.ncols()
            )));
        }
        if !(sampling_rate_hz > T::zero()) || !sampling_rate_hz.is_finite() {
            return Err(Error::InvalidSeries(format!(
                "sampling rate must be positive and finite, got {sampling_rate_hz}"
            )));
        }
        if labels.len() != samples.ncols() {
            return Err(Error::InvalidSeries(format!(
                "{} labels for {} channels",
                labels.len(),
                samples.ncols()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::InvalidSeries(format!(
                "duplicate channel label {dup:?}"
            )));
        }
        for r in 0..samples.nrows() {
            for (c, v) in samples.row(r).iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::BadCell {
                        row: r + 1,
                        column: c + 1,
                        value: v.to_string(),
                    });
                }
            }
        }
        Ok(Self {
            samples,
            sampling_rate_hz,
            labels,
        })
    }

    /// Same as [`new`](Self::new) with labels `ch1..chd`.
    pub fn with_default_labels(samples: Matrix<T>, sampling_rate_hz: T) -> Result<Self> {
        let labels = default_labels(samples.ncols());
        Self::new(samples, sampling_rate_hz, labels)
    }

    pub fn samples(&self) -> &Matrix<T> {
        &self.samples
    }

    pub fn sampling_rate_hz(&self) -> T {
        self.sampling_rate_hz
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of time points `T`.
    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    /// Number of channels `d`.
    pub fn channels(&self) -> usize {
        self.samples.ncols()
    }

    pub fn duration_sec(&self) -> T {
        T::of_usize(self.len()) / self.sampling_rate_hz
    }

    pub fn with_sampling_rate(mut self, sampling_rate_hz: T) -> Result<Self> {
        if !(sampling_rate_hz > T::zero()) || !sampling_rate_hz.is_finite() {
            return Err(Error::InvalidSeries(format!(
                "sampling rate must be positive and finite, got {sampling_rate_hz}"
            )));
        }
        self.sampling_rate_hz = sampling_rate_hz;
        Ok(self)
    }

    /// Reorders channels: output channel `i` is input channel `perm[i]`.
    pub fn permute_channels(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.channels());
        let samples = Matrix::from_fn(self.len(), self.channels(), |r, c| {
            self.samples[(r, perm[c])]
        });
        let labels = perm.iter().map(|&p| self.labels[p].clone()).collect();
        Self {
            samples,
            sampling_rate_hz: self.sampling_rate_hz,
            labels,
        }
    }

    /// Writes the series in the CSV format read by [`load_series`], header included.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(File::create(path).map_err(io_err)?);
        write_csv(self, &mut out).map_err(io_err)?;
        out.flush().map_err(io_err)
    }

    /// Row-exact window `[⌊start·fs⌋, ⌊end·fs⌋)`.
    pub fn segment(&self, start_sec: T, end_sec: T) -> Result<Self> {
        segment(self, start_sec, end_sec)
    }

    pub fn standardize(&self) -> Result<Self> {
        standardize(self)
    }
}

pub fn default_labels(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("ch{i}")).collect()
}

fn write_csv<T: Scalar>(s: &MultivariateSeries<T>, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{}", s.labels.join(","))?;
    for r in 0..s.len() {
        let mut first = true;
        for v in s.samples.row(r) {
            if !first {
                out.write_all(b",")?;
            }
            first = false;
            // `Display` for floats is the shortest representation that parses back exactly.
            write!(out, "{v}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a CSV recording. Labels default to `ch1..chd` when there is no header.
pub fn load_series<T: Scalar>(
    path: impl AsRef<Path>,
    sampling_rate_hz: T,
) -> Result<MultivariateSeries<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut labels: Option<Vec<String>> = None;
    let mut data: Vec<T> = Vec::new();
    let mut width: Option<usize> = None;
    let mut n_rows = 0usize;

    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let line = idx + 1;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if idx == 0 && record.iter().all(|c| c.parse::<f64>().is_err()) {
            labels = Some(record.iter().map(str::to_owned).collect());
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                row: line,
                expected,
                found: record.len(),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            let bad = || Error::BadCell {
                row: line,
                column: c + 1,
                value: cell.to_owned(),
            };
            let v: T = cell.parse().map_err(|_| bad())?;
            if !v.is_finite() {
                return Err(bad());
            }
            data.push(v);
        }
        n_rows += 1;
    }

    let d = width.unwrap_or(0);
    if d == 0 || n_rows == 0 {
        return Err(Error::InvalidSeries(format!(
            "{} contains no data rows",
            path.display()
        )));
    }
    let labels = labels.unwrap_or_else(|| default_labels(d));
    MultivariateSeries::new(Matrix::from_vec(n_rows, d, data), sampling_rate_hz, labels)
}

/// Rows `⌊start·fs⌋ .. ⌊end·fs⌋ − 1`; labels and sampling rate are kept.
pub fn segment<T: Scalar>(
    s: &MultivariateSeries<T>,
    start_sec: T,
    end_sec: T,
) -> Result<MultivariateSeries<T>> {
    let duration = s.duration_sec();
    let invalid = || Error::InvalidWindow {
        start: start_sec.as_f64(),
        end: end_sec.as_f64(),
        duration: duration.as_f64(),
    };
    if !start_sec.is_finite() || !end_sec.is_finite() {
        return Err(invalid());
    }
    if start_sec < T::zero() || !(start_sec < end_sec) || end_sec > duration {
        return Err(invalid());
    }
    let fs = s.sampling_rate_hz;
    let first = (start_sec * fs).floor().to_usize().ok_or_else(invalid)?;
    let last = (end_sec * fs)
        .floor()
        .to_usize()
        .ok_or_else(invalid)?
        .min(s.len());
    if first >= last {
        return Err(invalid());
    }
    let d = s.channels();
    let samples = Matrix::from_fn(last - first, d, |r, c| s.samples[(first + r, c)]);
    Ok(MultivariateSeries {
        samples,
        sampling_rate_hz: fs,
        labels: s.labels.clone(),
    })
}

/// Per-channel z-scoring with the `n − 1` sample variance.
pub fn standardize<T: Scalar>(s: &MultivariateSeries<T>) -> Result<MultivariateSeries<T>> {
    let n = s.len();
    if n < 2 {
        return Err(Error::InvalidSeries(format!(
            "standardization needs at least 2 samples, got {n}"
        )));
    }
    let d = s.channels();
    let nf = T::of_usize(n);
    let mut mean = vec![T::zero(); d];
    for r in 0..n {
        for (m, &v) in mean.iter_mut().zip(s.samples.row(r)) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= nf;
    }
    let mut var = vec![T::zero(); d];
    for r in 0..n {
        for ((acc, &v), &m) in var.iter_mut().zip(s.samples.row(r)).zip(&mean) {
            *acc += (v - m) * (v - m);
        }
    }
    let mut sd = Vec::with_capacity(d);
    for (c, v) in var.iter().enumerate() {
        let v = *v / T::of_usize(n - 1);
        let floor = T::epsilon() * mean[c].abs().max(T::one());
        if !(v.sqrt() > floor) {
            return Err(Error::ConstantChannel {
                label: s.labels[c].clone(),
            });
        }
        sd.push(v.sqrt());
    }
    let samples = Matrix::from_fn(n, d, |r, c| (s.samples[(r, c)] - mean[c]) / sd[c]);
    Ok(MultivariateSeries {
        samples,
        sampling_rate_hz: s.sampling_rate_hz,
        labels: s.labels.clone(),
    })
}
