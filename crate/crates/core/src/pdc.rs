//! Partial directed coherence.
//!
//! For a VAR model the spectral transform is `Ā(ω) = I − Σ_k Φ_k e^{−i2πkω}`
//! at normalized frequency `ω ∈ [0, 0.5]` (cycles per sample), and
//! `PDC_{p,q}(ω) = |Ā_{p,q}(ω)| / ‖Ā_{·,q}(ω)‖₂` measures flow from `q` to `p`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::var::VarModel;

/// Default number of frequencies averaged per band.
pub const DEFAULT_BAND_GRID: usize = 32;

/// `Ā(ω)` for a given model, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTransform<T> {
    pub omega: T,
    dim: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Scalar> SpectralTransform<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, p: usize, q: usize) -> Complex<T> {
        self.entries[p * self.dim + q]
    }

    /// Euclidean norm of column `q`, i.e. `sqrt(Ā_{·,q}^H Ā_{·,q})`.
    pub fn column_norm(&self, q: usize) -> T {
        (0..self.dim)
            .fold(T::zero(), |acc, p| acc + self.get(p, q).norm_sqr())
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FrequencyBand<T> {
    pub name: String,
    pub low_hz: T,
    pub high_hz: T,
}

impl<T: Scalar> FrequencyBand<T> {
    pub fn new(name: impl Into<String>, low_hz: T, high_hz: T) -> Result<Self> {
        let band = Self {
            name: name.into(),
            low_hz,
            high_hz,
        };
        if !(low_hz >= T::zero()) || !(high_hz > low_hz) || !high_hz.is_finite() {
            return Err(band.invalid(T::nan()));
        }
        Ok(band)
    }

    /// Errors when the band reaches beyond Nyquist for `fs_hz`.
    pub fn check(&self, fs_hz: T) -> Result<()> {
        if !(fs_hz > T::zero())
            || self.high_hz > fs_hz * T::half()
            || !(self.high_hz > self.low_hz)
            || self.low_hz < T::zero()
        {
            return Err(self.invalid(fs_hz));
        }
        Ok(())
    }

    fn invalid(&self, fs_hz: T) -> Error {
        Error::InvalidBand {
            name: self.name.clone(),
            low_hz: self.low_hz.as_f64(),
            high_hz: self.high_hz.as_f64(),
            fs_hz: fs_hz.as_f64(),
        }
    }

    /// The four EEG bands: delta 0–4, alpha 8–12, beta 12–30, gamma 30–50 Hz.
    pub fn eeg_defaults() -> Vec<Self> {
        [
            ("delta", 0.0, 4.0),
            ("alpha", 8.0, 12.0),
            ("beta", 12.0, 30.0),
            ("gamma", 30.0, 50.0),
        ]
        .into_iter()
        .map(|(n, lo, hi)| Self {
            name: n.to_string(),
            low_hz: T::of(lo),
            high_hz: T::of(hi),
        })
        .collect()
    }
}

/// Band-averaged PDC matrix: `weights[p][q]` is the flow from channel `q` to `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedNetwork<T> {
    weights: Matrix<T>,
    band: FrequencyBand<T>,
    labels: Vec<String>,
}

impl<T: Scalar> DirectedNetwork<T> {
    /// Weights must be square, finite and inside `[0, 1]`.
    pub fn new(weights: Matrix<T>, band: FrequencyBand<T>, labels: Vec<String>) -> Result<Self> {
        if !weights.is_square() || weights.nrows() == 0 {
            return Err(Error::InvalidMatrix(format!(
                "network weights are {}x{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        if labels.len() != weights.nrows() {
            return Err(Error::InvalidMatrix(format!(
                "{} labels for {} nodes",
                labels.len(),
                weights.nrows()
            )));
        }
        if weights
            .as_slice()
            .iter()
            .any(|w| !w.is_finite() || *w < T::zero() || *w > T::one())
        {
            return Err(Error::InvalidMatrix(
                "network weights must be finite and in [0, 1]".into(),
            ));
        }
        Ok(Self {
            weights,
            band,
            labels,
        })
    }

    /// Any finite square matrix; used for decomposition of arbitrary weighted graphs.
    pub fn unchecked_range(
        weights: Matrix<T>,
        band: FrequencyBand<T>,
        labels: Vec<String>,
    ) -> Result<Self> {
        if !weights.is_square()
            || weights.nrows() == 0
            || !weights.is_finite()
            || labels.len() != weights.nrows()
        {
            return Err(Error::InvalidMatrix(
                "weights must be square, finite and labelled".into(),
            ));
        }
        Ok(Self {
            weights,
            band,
            labels,
        })
    }

    pub fn weights(&self) -> &Matrix<T> {
        &self.weights
    }

    pub fn band(&self) -> &FrequencyBand<T> {
        &self.band
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.nrows() == 0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&DirectedNetworkJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: DirectedNetworkJson<T> = serde_json::from_str(s)?;
        w.try_into()
    }
}

/// Wire layout: `{"band":{...},"labels":[...],"w":[[...]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DirectedNetworkJson<T> {
    pub band: FrequencyBand<T>,
    pub labels: Vec<String>,
    pub w: Vec<Vec<T>>,
}

impl<T: Scalar> From<&DirectedNetwork<T>> for DirectedNetworkJson<T> {
    fn from(n: &DirectedNetwork<T>) -> Self {
        Self {
            band: n.band.clone(),
            labels: n.labels.clone(),
            w: n.weights.to_rows(),
        }
    }
}

impl<T: Scalar> TryFrom<DirectedNetworkJson<T>> for DirectedNetwork<T> {
    type Error = Error;

    fn try_from(w: DirectedNetworkJson<T>) -> Result<Self> {
        let m = Matrix::from_rows(&w.w)
            .ok_or_else(|| Error::InvalidMatrix("empty or ragged weight rows".into()))?;
        DirectedNetwork::unchecked_range(m, w.band, w.labels)
    }
}

/// Evaluates `Ā(ω) = I − Σ_k Φ_k e^{−i2πkω}`.
pub fn spectral_transform<T: Scalar>(m: &VarModel<T>, omega: T) -> SpectralTransform<T> {
    let d = m.dim();
    let mut entries = vec![Complex::new(T::zero(), T::zero()); d * d];
    for i in 0..d {
        entries[i * d + i] = Complex::new(T::one(), T::zero());
    }
    let two_pi = T::two() * T::PI();
    for (lag, phi) in m.coeffs().iter().enumerate() {
        let angle = -two_pi * T::of_usize(lag + 1) * omega;
        let phase = Complex::new(angle.cos(), angle.sin());
        for (e, &c) in entries.iter_mut().zip(phi.as_slice()) {
            *e -= phase * c;
        }
    }
    SpectralTransform {
        omega,
        dim: d,
        entries,
    }
}

/// PDC matrix at one normalized frequency.
pub fn pdc_at<T: Scalar>(m: &VarModel<T>, omega: T) -> Result<Matrix<T>> {
    let a = spectral_transform(m, omega);
    let d = a.dim();
    let mut out = Matrix::zeros(d, d);
    for q in 0..d {
        let norm = a.column_norm(q);
        if !(norm > T::zero()) {
            return Err(Error::ZeroColumnNorm {
                column: q,
                omega: omega.as_f64(),
            });
        }
        for p in 0..d {
            out[(p, q)] = (a.get(p, q).norm() / norm).min(T::one());
        }
    }
    Ok(out)
}

/// Normalized frequencies averaged for a band: `n_grid` equally spaced points
/// over `[low/fs, high/fs]` with both endpoints, or the midpoint when `n_grid = 1`.
pub fn band_grid<T: Scalar>(band: &FrequencyBand<T>, fs_hz: T, n_grid: usize) -> Vec<T> {
    let lo = band.low_hz / fs_hz;
    let hi = band.high_hz / fs_hz;
    match n_grid {
        0 => Vec::new(),
        1 => vec![(lo + hi) * T::half()],
        n => {
            let step = (hi - lo) / T::of_usize(n - 1);
            (0..n)
                .map(|i| {
                    if i + 1 == n {
                        hi
                    } else {
                        lo + step * T::of_usize(i)
                    }
                })
                .collect()
        }
    }
}

/// Arithmetic mean of [`pdc_at`] over the band grid.
pub fn pdc_band<T: Scalar>(
    m: &VarModel<T>,
    band: &FrequencyBand<T>,
    fs_hz: T,
    n_grid: usize,
    labels: &[String],
) -> Result<DirectedNetwork<T>> {
    band.check(fs_hz)?;
    if n_grid == 0 {
        return Err(Error::InvalidBand {
            name: band.name.clone(),
            low_hz: band.low_hz.as_f64(),
            high_hz: band.high_hz.as_f64(),
            fs_hz: fs_hz.as_f64(),
        });
    }
    if labels.len() != m.dim() {
        return Err(Error::InvalidModel(format!(
            "{} labels for a {}-channel model",
            labels.len(),
            m.dim()
        )));
    }
    let d = m.dim();
    let mut acc = Matrix::zeros(d, d);
    let grid = band_grid(band, fs_hz, n_grid);
    for &omega in &grid {
        acc = acc.add(&pdc_at(m, omega)?);
    }
    let n = T::of_usize(grid.len());
    let weights = acc.map(|x| (x / n).min(T::one()).max(T::zero()));
    DirectedNetwork::new(weights, band.clone(), labels.to_vec())
}
