//! Small dense linear algebra over [`Scalar`].
//!
//! Sizes in this crate are modest (at most a few hundred columns), so the
//! routines favour numerical robustness over blocking or cache tricks:
//! Householder QR for least squares, cyclic Jacobi for symmetric spectra and
//! a Hessenberg/Francis QR iteration for general eigenvalues.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major storage. Panics if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix storage length mismatch");
        Self { rows, cols, data }
    }

    /// Returns `None` for an empty or ragged row list.
    pub fn from_rows(rows: &[Vec<T>]) -> Option<Self> {
        let cols = rows.first()?.len();
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Some(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, k: T) -> Self {
        self.map(|x| x * k)
    }

    /// Entrywise combination of two equally shaped matrices.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// Frobenius inner product `sum_ij a_ij b_ij`.
    pub fn frobenius_dot(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn frobenius_norm(&self) -> T {
        self.frobenius_dot(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.sub(other).max_abs()
    }

    /// Largest `|a_ij - a_ji|`; zero for symmetric matrices.
    pub fn asymmetry(&self) -> T {
        assert!(self.is_square());
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Symmetric row/column permutation: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert!(self.is_square() && perm.len() == self.rows);
        Self::from_fn(self.rows, self.cols, |i, j| self[(perm[i], perm[j])])
    }

    /// Converts the element type, e.g. `f64` to `f32`.
    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| U::of(x.as_f64())).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`, or `None` when `A` is
/// not numerically positive definite.
pub fn cholesky<T: Scalar>(a: &Matrix<T>) -> Option<Matrix<T>> {
    assert!(a.is_square());
    let n = a.nrows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > T::zero()) {
            return None;
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// `log det A` for symmetric positive definite `A`.
pub fn log_det_spd<T: Scalar>(a: &Matrix<T>) -> Option<T> {
    let l = cholesky(a)?;
    Some((0..a.nrows()).fold(T::zero(), |acc, i| acc + l[(i, i)].ln()) * T::two())
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns.
pub fn symmetric_eigen<T: Scalar>(a: &Matrix<T>) -> (Vec<T>, Matrix<T>) {
    assert!(a.is_square());
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let total = m.frobenius_dot(&m);
    let tol = T::epsilon() * T::epsilon() * total;

    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off <= tol || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (T::two() * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(i, i)]
            .partial_cmp(&m[(j, j)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Square-root factor `F` with `F Fᵀ = A` for symmetric PSD `A`.
///
/// Uses Cholesky when it succeeds; otherwise falls back to `V diag(sqrt(max(λ, 0)))`.
pub fn psd_factor<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    if let Some(l) = cholesky(a) {
        return l;
    }
    let (values, vectors) = symmetric_eigen(a);
    let n = a.nrows();
    Matrix::from_fn(n, n, |r, c| {
        vectors[(r, c)] * values[c].max(T::zero()).sqrt()
    })
}

/// Solution of a multi-response least-squares problem.
#[derive(Debug, Clone)]
pub struct LeastSquares<T> {
    /// `p × m` coefficients, one column per response.
    pub coefficients: Matrix<T>,
    /// Ratio of the largest to the smallest `|R_ii|` of the QR factor.
    pub condition: T,
}

/// Minimises `‖X B − Y‖_F` by Householder QR of the `n × p` design `X`.
///
/// Returns `Err(condition)` when `X` is numerically rank deficient.
pub fn least_squares<T: Scalar>(
    design: &Matrix<T>,
    response: &Matrix<T>,
) -> Result<LeastSquares<T>, T> {
    let n = design.nrows();
    let p = design.ncols();
    let m = response.ncols();
    assert_eq!(response.nrows(), n);
    assert!(
        n >= p,
        "least squares needs at least as many rows as columns"
    );

    // Column-major working copies keep the Householder sweeps contiguous.
    let mut a: Vec<Vec<T>> = (0..p).map(|c| design.column(c)).collect();
    let mut b: Vec<Vec<T>> = (0..m).map(|c| response.column(c)).collect();
    let mut diag = vec![T::zero(); p];

    for j in 0..p {
        let norm = a[j][j..]
            .iter()
            .fold(T::zero(), |acc, &x| acc + x * x)
            .sqrt();
        if norm == T::zero() {
            return Err(T::infinity());
        }
        let alpha = if a[j][j] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2 = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
        diag[j] = alpha;
        if vnorm2 == T::zero() {
            continue;
        }
        let reflect = |col: &mut [T]| {
            let dot = col
                .iter()
                .zip(&v)
                .fold(T::zero(), |acc, (&x, &y)| acc + x * y);
            let f = T::two() * dot / vnorm2;
            for (x, &y) in col.iter_mut().zip(&v) {
                *x -= f * y;
            }
        };
        a[j][j] = alpha;
        for x in a[j][(j + 1)..].iter_mut() {
            *x = T::zero();
        }
        for col in a.iter_mut().skip(j + 1) {
            reflect(&mut col[j..]);
        }
        for col in b.iter_mut() {
            reflect(&mut col[j..]);
        }
    }

    let dmax = diag.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    let dmin = diag.iter().fold(T::infinity(), |acc, x| acc.min(x.abs()));
    let condition = if dmin > T::zero() {
        dmax / dmin
    } else {
        T::infinity()
    };
    let limit = T::one() / T::epsilon().powf(T::of(0.75));
    if !(condition < limit) {
        return Err(condition);
    }

    let mut coefficients = Matrix::zeros(p, m);
    for (k, rhs) in b.iter().enumerate() {
        for i in (0..p).rev() {
            let mut s = rhs[i];
            for j in (i + 1)..p {
                s -= a[j][i] * coefficients[(j, k)];
            }
            coefficients[(i, k)] = s / a[i][i];
        }
    }
    Ok(LeastSquares {
        coefficients,
        condition,
    })
}

/// All eigenvalues of a general real square matrix.
///
/// Balances the matrix, reduces it to upper Hessenberg form with Householder
/// reflections and runs the shifted Francis double-step QR iteration. Returns
/// `None` if an eigenvalue fails to converge.
pub fn eigenvalues<T: Scalar>(a: &Matrix<T>) -> Option<Vec<Complex<T>>> {
    assert!(a.is_square());
    let n = a.nrows();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut h: Vec<Vec<T>> = a.to_rows();
    balance(&mut h);
    hessenberg(&mut h);
    hqr(h)
}

/// Largest eigenvalue modulus.
pub fn spectral_radius<T: Scalar>(a: &Matrix<T>) -> Option<T> {
    Some(
        eigenvalues(a)?
            .iter()
            .fold(T::zero(), |m, z| m.max(z.norm())),
    )
}

fn balance<T: Scalar>(a: &mut [Vec<T>]) {
    let n = a.len();
    let radix = T::two();
    let sqrdx = radix * radix;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != T::zero() && r != T::zero() {
                let mut g = r / radix;
                let mut f = T::one();
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < T::of(0.95) * s {
                    done = false;
                    let ginv = T::one() / f;
                    for x in a[i].iter_mut() {
                        *x *= ginv;
                    }
                    for row in a.iter_mut() {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

fn hessenberg<T: Scalar>(a: &mut [Vec<T>]) {
    let n = a.len();
    if n < 3 {
        return;
    }
    for k in 0..(n - 2) {
        let norm = ((k + 1)..n)
            .fold(T::zero(), |acc, i| acc + a[i][k] * a[i][k])
            .sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if a[k + 1][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = ((k + 1)..n).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm2 = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
        if vnorm2 == T::zero() {
            continue;
        }
        for j in k..n {
            let dot = v
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (t, &vt)| acc + vt * a[k + 1 + t][j]);
            let f = T::two() * dot / vnorm2;
            for (t, &vt) in v.iter().enumerate() {
                a[k + 1 + t][j] -= f * vt;
            }
        }
        for row in a.iter_mut() {
            let dot = v
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (t, &vt)| acc + vt * row[k + 1 + t]);
            let f = T::two() * dot / vnorm2;
            for (t, &vt) in v.iter().enumerate() {
                row[k + 1 + t] -= f * vt;
            }
        }
        for i in (k + 2)..n {
            a[i][k] = T::zero();
        }
    }
}

#[inline]
fn sign<T: Scalar>(a: T, b: T) -> T {
    if b >= T::zero() {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix (Francis double shift).
#[allow(clippy::many_single_char_names)]
fn hqr<T: Scalar>(mut a: Vec<Vec<T>>) -> Option<Vec<Complex<T>>> {
    let n = a.len();
    let eps = T::epsilon();
    let zero = T::zero();
    let mut wr = vec![Complex::new(zero, zero); n];

    let mut anorm = zero;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }

    let mut nn = n as isize - 1;
    let mut t = zero;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l > 0 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == zero {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= eps * s {
                    a[l][l - 1] = zero;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                wr[nu] = Complex::new(x + t, zero);
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l + 1 == nu {
                let p = T::half() * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= zero {
                    z = p + sign(z, p);
                    wr[nu - 1] = Complex::new(x + z, zero);
                    wr[nu] = Complex::new(x + z, zero);
                    if z != zero {
                        wr[nu] = Complex::new(x - w / z, zero);
                    }
                } else {
                    wr[nu] = Complex::new(x + p, -z);
                    wr[nu - 1] = Complex::new(x + p, z);
                }
                nn -= 2;
                break;
            }

            if its == 60 {
                return None;
            }
            if its > 0 && its % 10 == 0 {
                t += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = T::of(0.75) * s;
                y = x;
                w = T::of(-0.4375) * s * s;
            }
            its += 1;

            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m..(nu - 1) {
                a[i + 2][i] = zero;
                if i != m {
                    a[i + 2][i - 1] = zero;
                }
            }
            for k in m..nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = zero;
                    if k + 1 != nu {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != zero {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != zero {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[k][j] + q * a[k + 1][j];
                        if k + 1 != nu {
                            pp += r * a[k + 2][j];
                            a[k + 2][j] -= pp * z;
                        }
                        a[k + 1][j] -= pp * y;
                        a[k][j] -= pp * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for row in a.iter_mut().take(mmin + 1).skip(l) {
                        let mut pp = x * row[k] + y * row[k + 1];
                        if k + 1 != nu {
                            pp += z * row[k + 2];
                            row[k + 2] -= pp * r;
                        }
                        row[k + 1] -= pp * q;
                        row[k] -= pp;
                    }
                }
            }
        }
    }
    Some(wr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation(theta: f64) -> Matrix<f64> {
        Matrix::from_rows(&[
            vec![theta.cos(), -theta.sin()],
            vec![theta.sin(), theta.cos()],
        ])
        .unwrap()
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = Matrix::from_rows(&[
            vec![4.0, 2.0, 0.4],
            vec![2.0, 5.0, 1.0],
            vec![0.4, 1.0, 3.0],
        ])
        .unwrap();
        let l = cholesky(&a).unwrap();
        assert!(l.matmul(&l.transpose()).max_abs_diff(&a) < 1e-14);
        assert!(cholesky(&Matrix::<f64>::from_diagonal(&[1.0, 0.0])).is_none());
    }

    #[test]
    fn psd_factor_handles_singular_covariance() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let f = psd_factor(&a);
        assert!(f.matmul(&f.transpose()).max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn jacobi_eigenpairs() {
        let a = Matrix::from_rows(&[
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ])
        .unwrap();
        let (vals, vecs) = symmetric_eigen(&a);
        let expected = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12);
        }
        let back = vecs
            .matmul(&Matrix::from_diagonal(&vals))
            .matmul(&vecs.transpose());
        assert!(back.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn least_squares_exact_fit() {
        let x = Matrix::from_fn(6, 2, |r, c| if c == 0 { 1.0 } else { r as f64 });
        let y = Matrix::from_fn(6, 1, |r, _| 3.0 - 0.5 * r as f64);
        let fit = least_squares(&x, &y).unwrap();
        assert!((fit.coefficients[(0, 0)] - 3.0).abs() < 1e-12);
        assert!((fit.coefficients[(1, 0)] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn least_squares_flags_duplicate_columns() {
        let x = Matrix::from_fn(10, 3, |r, c| {
            if c == 2 {
                (r as f64).sin()
            } else {
                (r as f64).sin() + 0.0 * c as f64
            }
        });
        let y = Matrix::from_fn(10, 1, |r, _| r as f64);
        assert!(least_squares(&x, &y).is_err());
    }

    #[test]
    fn eigenvalues_of_rotation_lie_on_unit_circle() {
        let ev = eigenvalues(&rotation(0.7)).unwrap();
        for z in ev {
            assert!((z.norm() - 1.0).abs() < 1e-12);
            assert!((z.im.abs() - 0.7f64.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn companion_of_known_polynomial() {
        // (x - 0.5)(x + 0.25)(x - 0.9) = x^3 - 1.15x^2 + 0.1x + 0.1125
        let c = Matrix::from_rows(&[
            vec![1.15, -0.1, -0.1125],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        let mut re: Vec<f64> = eigenvalues(&c).unwrap().iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in re.iter().zip([-0.25, 0.5, 0.9]) {
            assert!((a - b).abs() < 1e-10, "{re:?}");
        }
        assert!((spectral_radius(&c).unwrap() - 0.9).abs() < 1e-10);
    }
}
