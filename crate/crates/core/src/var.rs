//! Vector autoregressive models: least-squares fitting, order selection,
//! stability and Gaussian simulation.
//!
//! The model is `X(t) = Σ_k Φ_k X(t−k) + E(t)` with `E(t) ~ N(0, Σ_E)`, where
//! `Φ_k[p][q]` is the effect of channel `q` at lag `k` on channel `p`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::MultivariateSeries;
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;

/// Companion spectral radius must stay below `1 − STABILITY_MARGIN`.
pub const STABILITY_MARGIN: f64 = 1e-8;

/// Default number of simulated samples discarded before recording.
pub const DEFAULT_BURN_IN: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct VarModel<T> {
    coeffs: Vec<Matrix<T>>,
    innovation_cov: Matrix<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderCriterion {
    Aic,
    Bic,
}

impl std::str::FromStr for OrderCriterion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Self::Aic),
            "bic" => Ok(Self::Bic),
            other => Err(format!(
                "unknown order criterion {other:?} (expected aic or bic)"
            )),
        }
    }
}

impl<T: Scalar> VarModel<T> {
    /// Validates lag matrices and innovation covariance.
    pub fn new(coeffs: Vec<Matrix<T>>, innovation_cov: Matrix<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidModel("order must be at least 1".into()));
        }
        let d = innovation_cov.nrows();
        if d == 0 || !innovation_cov.is_square() {
            return Err(Error::InvalidModel(
                "innovation covariance must be a non-empty square matrix".into(),
            ));
        }
        for (k, phi) in coeffs.iter().enumerate() {
            if phi.nrows() != d || phi.ncols() != d {
                return Err(Error::InvalidModel(format!(
                    "lag {} matrix is {}x{}, expected {d}x{d}",
                    k + 1,
                    phi.nrows(),
                    phi.ncols()
                )));
            }
            if !phi.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "lag {} matrix has non-finite entries",
                    k + 1
                )));
            }
        }
        if !innovation_cov.is_finite() {
            return Err(Error::InvalidModel(
                "innovation covariance has non-finite entries".into(),
            ));
        }
        let tol = T::of(1e-10).max(T::of(100.0) * T::epsilon() * innovation_cov.max_abs());
        let asym = innovation_cov.asymmetry();
        if asym > tol {
            return Err(Error::InvalidModel(format!(
                "innovation covariance is not symmetric (max asymmetry {asym})"
            )));
        }
        let (eig, _) = linalg::symmetric_eigen(&innovation_cov);
        if eig[0] < -tol {
            return Err(Error::InvalidModel(format!(
                "innovation covariance is not positive semidefinite (min eigenvalue {})",
                eig[0]
            )));
        }
        Ok(Self {
            coeffs,
            innovation_cov,
        })
    }

    /// Lag order `K`.
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Channel count `d`.
    pub fn dim(&self) -> usize {
        self.innovation_cov.nrows()
    }

    /// `Φ_1 .. Φ_K`.
    pub fn coeffs(&self) -> &[Matrix<T>] {
        &self.coeffs
    }

    pub fn innovation_cov(&self) -> &Matrix<T> {
        &self.innovation_cov
    }

    /// The `dK × dK` companion matrix.
    pub fn companion(&self) -> Matrix<T> {
        let d = self.dim();
        let k = self.order();
        let mut c = Matrix::zeros(d * k, d * k);
        for (lag, phi) in self.coeffs.iter().enumerate() {
            for p in 0..d {
                for q in 0..d {
                    c[(p, lag * d + q)] = phi[(p, q)];
                }
            }
        }
        for i in d..(d * k) {
            c[(i, i - d)] = T::one();
        }
        c
    }

    /// Spectral radius of the companion matrix; `None` if the eigenvalue
    /// iteration failed to converge.
    pub fn spectral_radius(&self) -> Option<T> {
        linalg::spectral_radius(&self.companion())
    }

    pub fn is_stable(&self) -> bool {
        is_stable(self)
    }

    /// Same model with channels reordered: new channel `i` is old channel `perm[i]`.
    pub fn permute_channels(&self, perm: &[usize]) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|m| m.permute(perm)).collect(),
            innovation_cov: self.innovation_cov.permute(perm),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&VarModelJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: VarModelJson<T> = serde_json::from_str(s)?;
        wire.try_into()
    }
}

/// Wire layout: `{"k":K,"d":d,"coeffs":[[...]],"sigma":[[...]]}`; each lag
/// matrix is flattened row-major, `sigma` is a list of rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct VarModelJson<T> {
    pub k: usize,
    pub d: usize,
    pub coeffs: Vec<Vec<T>>,
    pub sigma: Vec<Vec<T>>,
}

impl<T: Scalar> From<&VarModel<T>> for VarModelJson<T> {
    fn from(m: &VarModel<T>) -> Self {
        Self {
            k: m.order(),
            d: m.dim(),
            coeffs: m.coeffs.iter().map(|c| c.as_slice().to_vec()).collect(),
            sigma: m.innovation_cov.to_rows(),
        }
    }
}

impl<T: Scalar> TryFrom<VarModelJson<T>> for VarModel<T> {
    type Error = Error;

    fn try_from(w: VarModelJson<T>) -> Result<Self> {
        if w.coeffs.len() != w.k {
            return Err(Error::InvalidModel(format!(
                "k = {} but {} lag matrices",
                w.k,
                w.coeffs.len()
            )));
        }
        let d = w.d;
        let mut coeffs = Vec::with_capacity(w.k);
        for (i, flat) in w.coeffs.into_iter().enumerate() {
            if flat.len() != d * d {
                return Err(Error::InvalidModel(format!(
                    "lag {} has {} entries, expected {}",
                    i + 1,
                    flat.len(),
                    d * d
                )));
            }
            coeffs.push(Matrix::from_vec(d, d, flat));
        }
        let sigma = Matrix::from_rows(&w.sigma)
            .filter(|m| m.nrows() == d && m.ncols() == d)
            .ok_or_else(|| Error::InvalidModel(format!("sigma must be {d}x{d}")))?;
        VarModel::new(coeffs, sigma)
    }
}

/// Full least-squares output, including the discarded intercept and residuals.
#[derive(Debug, Clone)]
pub struct VarFit<T> {
    pub model: VarModel<T>,
    pub intercept: Vec<T>,
    /// `(T − K) × d` residuals aligned with rows `K..T` of the input.
    pub residuals: Matrix<T>,
    /// Condition estimate of the regressor matrix.
    pub condition: T,
}

/// OLS fit of a VAR(k) with an internal intercept.
pub fn fit_var<T: Scalar>(s: &MultivariateSeries<T>, k: usize) -> Result<VarModel<T>> {
    Ok(fit_var_detailed(s, k)?.model)
}

pub fn fit_var_detailed<T: Scalar>(s: &MultivariateSeries<T>, k: usize) -> Result<VarFit<T>> {
    fit_from(s, k, k)
}

/// Fits using responses at rows `first..T` (requires `first ≥ k`).
fn fit_from<T: Scalar>(s: &MultivariateSeries<T>, k: usize, first: usize) -> Result<VarFit<T>> {
    if k == 0 {
        return Err(Error::InvalidModel("order must be at least 1".into()));
    }
    debug_assert!(first >= k);
    let n = s.len();
    let d = s.channels();
    let needed = d * k + k;
    if n <= needed || n <= first {
        return Err(Error::InsufficientData {
            order: k,
            channels: d,
            needed,
            available: n,
        });
    }
    let rows = n - first;
    let p = 1 + d * k;
    if rows < p {
        return Err(Error::InsufficientData {
            order: k,
            channels: d,
            needed,
            available: n,
        });
    }
    let x = s.samples();
    let design = Matrix::from_fn(rows, p, |r, c| {
        if c == 0 {
            T::one()
        } else {
            let lag = (c - 1) / d + 1;
            let q = (c - 1) % d;
            x[(first + r - lag, q)]
        }
    });
    let response = Matrix::from_fn(rows, d, |r, c| x[(first + r, c)]);

    let ls = linalg::least_squares(&design, &response).map_err(|condition| {
        Error::SingularRegressors {
            condition: condition.as_f64(),
        }
    })?;
    let b = &ls.coefficients;

    let coeffs = (0..k)
        .map(|lag| Matrix::from_fn(d, d, |pp, q| b[(1 + lag * d + q, pp)]))
        .collect();
    let intercept = (0..d).map(|pp| b[(0, pp)]).collect();
    let residuals = response.sub(&design.matmul(b));

    let denom = T::of_usize(rows);
    let mut sigma = residuals
        .transpose()
        .matmul(&residuals)
        .scale(T::one() / denom);
    for i in 0..d {
        for j in (i + 1)..d {
            let v = (sigma[(i, j)] + sigma[(j, i)]) * T::half();
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    Ok(VarFit {
        model: VarModel::new(coeffs, sigma)?,
        intercept,
        residuals,
        condition: ls.condition,
    })
}

/// Criterion values for `k = 1..=k_max` on the common sample `k_max..T`.
pub fn criterion_values<T: Scalar>(
    s: &MultivariateSeries<T>,
    k_max: usize,
    crit: OrderCriterion,
) -> Result<Vec<T>> {
    if k_max == 0 {
        return Err(Error::InvalidModel("k_max must be at least 1".into()));
    }
    let d = s.channels();
    let mut values = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let fit = fit_from(s, k, k_max)?;
        let t_eff = T::of_usize(s.len() - k_max);
        let log_det =
            linalg::log_det_spd(fit.model.innovation_cov()).ok_or(Error::DegenerateCovariance)?;
        let params = T::of_usize(k * d * d);
        let penalty = match crit {
            OrderCriterion::Aic => T::two() * params / t_eff,
            OrderCriterion::Bic => t_eff.ln() * params / t_eff,
        };
        values.push(log_det + penalty);
    }
    Ok(values)
}

/// Order in `1..=k_max` minimising the criterion; ties go to the smaller order.
pub fn select_order<T: Scalar>(
    s: &MultivariateSeries<T>,
    k_max: usize,
    crit: OrderCriterion,
) -> Result<usize> {
    let values = criterion_values(s, k_max, crit)?;
    Ok(argmin_first(&values) + 1)
}

/// Index of the first minimum.
pub(crate) fn argmin_first<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// `true` iff the companion spectral radius is below `1 − 1e-8`.
pub fn is_stable<T: Scalar>(m: &VarModel<T>) -> bool {
    match m.spectral_radius() {
        Some(r) => r < T::one() - T::of(STABILITY_MARGIN),
        None => false,
    }
}

/// Simulates `t` samples from zero initial state after discarding `burn_in`.
///
/// Innovations are `F z` with `z` iid standard normal and `F Fᵀ = Σ_E`. The
/// output has unit sampling rate and default labels.
pub fn simulate_var<T: Scalar>(
    m: &VarModel<T>,
    t: usize,
    seed: u64,
    burn_in: usize,
) -> Result<MultivariateSeries<T>> {
    if !is_stable(m) {
        return Err(Error::Unstable {
            spectral_radius: m.spectral_radius().map_or(f64::NAN, |r| r.as_f64()),
        });
    }
    if t == 0 {
        return Err(Error::InvalidSeries("cannot simulate zero samples".into()));
    }
    let d = m.dim();
    let factor = linalg::psd_factor(m.innovation_cov());
    let mut noise = GaussianStream::new(seed);
    let total = burn_in + t;
    // Row `i` holds X(i).
    let mut hist = Matrix::zeros(total, d);
    let mut z = vec![T::zero(); d];
    for step in 0..total {
        noise.fill(&mut z);
        let mut x = factor.matvec(&z);
        for (lag, phi) in m.coeffs().iter().enumerate() {
            let lag = lag + 1;
            if step < lag {
                break;
            }
            let past = hist.row(step - lag).to_vec();
            for (xi, v) in x.iter_mut().zip(phi.matvec(&past)) {
                *xi += v;
            }
        }
        hist.row_mut(step).copy_from_slice(&x);
    }
    let samples = Matrix::from_fn(t, d, |r, c| hist[(burn_in + r, c)]);
    MultivariateSeries::with_default_labels(samples, T::one())
}

/// Seeded source of iid standard normal vectors, drawn component by component.
pub(crate) struct GaussianStream {
    rng: ChaCha8Rng,
}

impl GaussianStream {
    pub(crate) fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub(crate) fn fill<T: Scalar>(&mut self, out: &mut [T]) {
        for v in out.iter_mut() {
            let x: f64 = StandardNormal.sample(&mut self.rng);
            *v = T::of(x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_model(coef: f64, d: usize) -> VarModel<f64> {
        VarModel::new(vec![Matrix::identity(d).scale(coef)], Matrix::identity(d)).unwrap()
    }

    /// Stable VAR(2) on 5 channels used throughout the tests.
    pub(crate) fn reference_var2() -> VarModel<f64> {
        let phi1 = Matrix::from_rows(&[
            vec![0.5, 0.0, 0.0, 0.2, 0.0],
            vec![0.3, 0.4, 0.0, 0.0, 0.0],
            vec![0.0, -0.3, 0.3, 0.0, 0.0],
            vec![0.0, 0.0, 0.25, 0.35, 0.0],
            vec![0.0, 0.0, 0.0, 0.3, 0.4],
        ])
        .unwrap();
        let phi2 = Matrix::from_rows(&[
            vec![-0.2, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, -0.2, 0.0, 0.0, 0.1],
            vec![0.0, 0.0, -0.15, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, -0.2, 0.0],
            vec![0.15, 0.0, 0.0, 0.0, -0.1],
        ])
        .unwrap();
        VarModel::new(vec![phi1, phi2], Matrix::identity(5)).unwrap()
    }

    fn max_coeff_error(a: &VarModel<f64>, b: &VarModel<f64>) -> f64 {
        a.coeffs()
            .iter()
            .zip(b.coeffs())
            .map(|(x, y)| x.max_abs_diff(y))
            .fold(0.0, f64::max)
    }

    #[test]
    fn stability_examples() {
        assert!(is_stable(&diag_model(0.5, 2)));
        assert!(!is_stable(&diag_model(1.0, 2)));
        assert!(!is_stable(&diag_model(1.1, 2)));
        assert!(is_stable(&reference_var2()));
    }

    #[test]
    fn companion_radius_matches_nalgebra() {
        let m = reference_var2();
        let c = m.companion();
        let na = nalgebra::DMatrix::from_row_slice(c.nrows(), c.ncols(), c.as_slice());
        let oracle = na
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!((m.spectral_radius().unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_covariance() {
        let asym = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(VarModel::new(vec![Matrix::zeros(2, 2)], asym).is_err());
        let indefinite = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(VarModel::new(vec![Matrix::zeros(2, 2)], indefinite).is_err());
        assert!(VarModel::<f64>::new(vec![], Matrix::identity(2)).is_err());
    }

    #[test]
    fn simulation_is_deterministic() {
        let m = reference_var2();
        let a = simulate_var(&m, 300, 11, 50).unwrap();
        let b = simulate_var(&m, 300, 11, 50).unwrap();
        assert_eq!(a, b);
        let c = simulate_var(&m, 300, 12, 50).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn unstable_simulation_fails() {
        assert!(matches!(
            simulate_var(&diag_model(1.0, 2), 10, 0, 0),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn white_noise_moments() {
        let m = VarModel::<f64>::new(vec![Matrix::zeros(3, 3)], Matrix::identity(3)).unwrap();
        let t = 20_000;
        let s = simulate_var(&m, t, 5, 0).unwrap();
        let x = s.samples();
        let cov = x.transpose().matmul(x).scale(1.0 / t as f64);
        let bound = 3.0 / (t as f64).sqrt();
        assert!(cov.max_abs_diff(&Matrix::identity(3)) < bound, "{cov:?}");
    }

    #[test]
    fn singular_covariance_still_simulates() {
        let sigma = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let m = VarModel::new(vec![Matrix::identity(2).scale(0.3)], sigma).unwrap();
        let s: MultivariateSeries<f64> = simulate_var(&m, 100, 1, 10).unwrap();
        for r in 0..s.len() {
            let row = s.samples().row(r);
            assert!((row[0] - row[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn fit_recovers_var2() {
        let truth = reference_var2();
        let s = simulate_var(&truth, 2000, 42, DEFAULT_BURN_IN).unwrap();
        let fit = fit_var(&s, 2).unwrap();
        let err = max_coeff_error(&fit, &truth);
        assert!(err < 0.1, "max coefficient error {err}");
    }

    #[test]
    fn white_noise_fit_is_small() {
        let m = VarModel::<f64>::new(vec![Matrix::zeros(3, 3)], Matrix::identity(3)).unwrap();
        let s = simulate_var(&m, 5000, 3, 0).unwrap();
        let fit = fit_var(&s, 1).unwrap();
        assert!(fit.coeffs()[0].max_abs() < 0.1);
    }

    #[test]
    fn insufficient_samples() {
        let m = VarModel::<f64>::new(vec![Matrix::zeros(3, 3)], Matrix::identity(3)).unwrap();
        let s = simulate_var(&m, 6, 3, 0).unwrap();
        assert!(matches!(
            fit_var(&s, 2),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn duplicated_channel_is_singular() {
        let base = simulate_var(&diag_model(0.5, 1), 200, 1, 10).unwrap();
        let x = base.samples();
        let dup = Matrix::from_fn(200, 2, |r, _| x[(r, 0)]);
        let s = MultivariateSeries::with_default_labels(dup, 1.0).unwrap();
        assert!(matches!(
            fit_var(&s, 1),
            Err(Error::SingularRegressors { .. })
        ));
    }

    #[test]
    fn residuals_satisfy_normal_equations() {
        let s = simulate_var(&reference_var2(), 1500, 9, 100).unwrap();
        let k = 2;
        let fit = fit_var_detailed(&s, k).unwrap();
        let x = s.samples();
        let d = s.channels();
        for lag in 1..=k {
            for q in 0..d {
                for p in 0..d {
                    let dot: f64 = (0..fit.residuals.nrows())
                        .map(|r| fit.residuals[(r, p)] * x[(k + r - lag, q)])
                        .sum();
                    assert!(dot.abs() < 1e-8, "lag {lag} regressor {q} eq {p}: {dot}");
                }
            }
        }
        for p in 0..d {
            let sum: f64 = fit.residuals.column(p).iter().sum();
            assert!(sum.abs() < 1e-8);
        }
    }

    #[test]
    fn fit_is_consistent_in_sample_size() {
        let truth = reference_var2();
        let mut errs = Vec::new();
        for t in [500, 2000, 8000] {
            let mean_err: f64 = (0..4)
                .map(|seed| {
                    let s = simulate_var(&truth, t, 100 + seed, DEFAULT_BURN_IN).unwrap();
                    max_coeff_error(&fit_var(&s, 2).unwrap(), &truth)
                })
                .sum::<f64>()
                / 4.0;
            errs.push(mean_err);
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn bic_selects_true_order() {
        let s = simulate_var(&reference_var2(), 5000, 7, DEFAULT_BURN_IN).unwrap();
        assert_eq!(select_order(&s, 6, OrderCriterion::Bic).unwrap(), 2);
        assert_eq!(select_order(&s, 1, OrderCriterion::Aic).unwrap(), 1);
    }

    #[test]
    fn selection_ignores_channel_order() {
        let s = simulate_var(&reference_var2(), 3000, 8, DEFAULT_BURN_IN).unwrap();
        let perm = [3, 0, 4, 1, 2];
        for crit in [OrderCriterion::Aic, OrderCriterion::Bic] {
            assert_eq!(
                select_order(&s, 5, crit).unwrap(),
                select_order(&s.permute_channels(&perm), 5, crit).unwrap()
            );
        }
    }

    #[test]
    fn ties_prefer_smaller_order() {
        assert_eq!(argmin_first(&[2.0, 1.0, 1.0, 3.0]), 1);
        assert_eq!(argmin_first(&[1.0, 1.0]), 0);
    }

    #[test]
    fn json_layout() {
        let m = reference_var2();
        let json = m.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["k"], 2);
        assert_eq!(v["d"], 5);
        assert_eq!(v["coeffs"].as_array().unwrap().len(), 2);
        assert_eq!(v["coeffs"][0].as_array().unwrap().len(), 25);
        assert_eq!(v["coeffs"][0][3], 0.2);
        assert_eq!(v["sigma"].as_array().unwrap().len(), 5);
        assert_eq!(VarModel::<f64>::from_json(&json).unwrap(), m);
        assert!(
            VarModel::<f64>::from_json(r#"{"k":2,"d":1,"coeffs":[[0.1]],"sigma":[[1]]}"#).is_err()
        );
    }
}
