//! Symmetric / anti-symmetric split of a directed network and the
//! departure-from-symmetry distance `|W_a|` the filtration is built on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pdc::{DirectedNetwork, DirectedNetworkJson};
use crate::scalar::Scalar;

/// `W = W_s + W_a` with `W_s = ½(W + Wᵀ)` and `W_a = ½(W − Wᵀ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDecomposition<T> {
    w_s: Matrix<T>,
    w_a: Matrix<T>,
    source: DirectedNetwork<T>,
}

impl<T: Scalar> NetworkDecomposition<T> {
    pub fn symmetric(&self) -> &Matrix<T> {
        &self.w_s
    }

    pub fn antisymmetric(&self) -> &Matrix<T> {
        &self.w_a
    }

    pub fn source(&self) -> &DirectedNetwork<T> {
        &self.source
    }
}

/// Symmetric, nonnegative, zero-diagonal dissimilarity between labelled nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    dist: Matrix<T>,
    labels: Vec<String>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Validates symmetry (exact), zero diagonal, finiteness and nonnegativity.
    pub fn new(dist: Matrix<T>, labels: Vec<String>) -> Result<Self> {
        let n = dist.nrows();
        if !dist.is_square() || n == 0 {
            return Err(Error::InvalidMatrix(format!(
                "distance matrix is {}x{}",
                n,
                dist.ncols()
            )));
        }
        if labels.len() != n {
            return Err(Error::InvalidMatrix(format!(
                "{} labels for {n} nodes",
                labels.len()
            )));
        }
        for p in 0..n {
            if dist[(p, p)] != T::zero() {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry {p} is nonzero"
                )));
            }
            for q in 0..n {
                let v = dist[(p, q)];
                if !v.is_finite() || v < T::zero() {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({p}, {q}) = {v} is not a finite nonnegative value"
                    )));
                }
                if v != dist[(q, p)] {
                    return Err(Error::InvalidMatrix(format!(
                        "entries ({p}, {q}) and ({q}, {p}) differ"
                    )));
                }
            }
        }
        Ok(Self { dist, labels })
    }

    pub fn with_default_labels(dist: Matrix<T>) -> Result<Self> {
        let labels = crate::ingest::default_labels(dist.nrows());
        Self::new(dist, labels)
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.dist
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dist.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.nrows() == 0
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> T {
        self.dist[(p, q)]
    }
}

pub fn decompose<T: Scalar>(n: &DirectedNetwork<T>) -> NetworkDecomposition<T> {
    let w = n.weights();
    let d = w.nrows();
    let mut w_s = Matrix::zeros(d, d);
    let mut w_a = Matrix::zeros(d, d);
    for p in 0..d {
        w_s[(p, p)] = w[(p, p)];
        for q in (p + 1)..d {
            let s = (w[(p, q)] + w[(q, p)]) * T::half();
            let a = (w[(p, q)] - w[(q, p)]) * T::half();
            w_s[(p, q)] = s;
            w_s[(q, p)] = s;
            w_a[(p, q)] = a;
            w_a[(q, p)] = -a;
        }
    }
    NetworkDecomposition {
        w_s,
        w_a,
        source: n.clone(),
    }
}

/// `dist[p][q] = |W_a[p][q]|` with the diagonal pinned to zero.
pub fn asym_distance<T: Scalar>(dec: &NetworkDecomposition<T>) -> DistanceMatrix<T> {
    let d = dec.w_a.nrows();
    let dist = Matrix::from_fn(d, d, |p, q| {
        if p == q {
            T::zero()
        } else {
            dec.w_a[(p, q)].abs()
        }
    });
    DistanceMatrix {
        dist,
        labels: dec.source.labels().to_vec(),
    }
}

/// `‖W − candidate‖_F` for a symmetric candidate.
pub fn projection_residual<T: Scalar>(
    dec: &NetworkDecomposition<T>,
    candidate: &Matrix<T>,
) -> Result<T> {
    let w = dec.source.weights();
    if candidate.nrows() != w.nrows() || candidate.ncols() != w.ncols() {
        return Err(Error::InvalidMatrix(format!(
            "candidate is {}x{}, network is {}x{}",
            candidate.nrows(),
            candidate.ncols(),
            w.nrows(),
            w.ncols()
        )));
    }
    let asym = candidate.asymmetry();
    if asym > T::of(1e-10) {
        return Err(Error::NotSymmetric {
            asymmetry: asym.as_f64(),
        });
    }
    Ok(w.sub(candidate).frobenius_norm())
}

/// Wire layout: the source network plus `w_s`, `w_a` and `dist` as row lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DecompositionJson<T> {
    pub source: DirectedNetworkJson<T>,
    pub w_s: Vec<Vec<T>>,
    pub w_a: Vec<Vec<T>>,
    pub dist: Vec<Vec<T>>,
}

impl<T: Scalar> DecompositionJson<T> {
    pub fn new(dec: &NetworkDecomposition<T>) -> Self {
        Self {
            source: DirectedNetworkJson::from(&dec.source),
            w_s: dec.w_s.to_rows(),
            w_a: dec.w_a.to_rows(),
            dist: asym_distance(dec).dist.to_rows(),
        }
    }

    /// Recovers the distance matrix, validating it.
    pub fn distance(&self) -> Result<DistanceMatrix<T>> {
        let m = Matrix::from_rows(&self.dist)
            .ok_or_else(|| Error::InvalidMatrix("empty or ragged dist rows".into()))?;
        DistanceMatrix::new(m, self.source.labels.clone())
    }
}
