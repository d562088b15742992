//! Persistence landscapes and diagram distances.
//!
//! Landscapes are sampled on a uniform grid over `[0, t_max]`; essential
//! classes are truncated at `t_max` first. Diagram distances use the
//! `ℓ∞` ground metric between `(birth, death)` points, with every point free
//! to match its diagonal projection. Essential classes only match each other.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::PersistenceDiagram;
use crate::scalar::Scalar;

pub const DEFAULT_LANDSCAPE_LEVELS: usize = 5;
pub const DEFAULT_LANDSCAPE_GRID: usize = 512;
/// Essential classes are truncated at this multiple of the largest finite death.
pub const T_MAX_FACTOR: f64 = 1.05;

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceLandscape<T> {
    dim: usize,
    grid: Vec<T>,
    levels: Vec<Vec<T>>,
}

/// Norm used by [`landscape_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LandscapeNorm {
    /// Trapezoidal `L²` over all levels.
    L2,
    Sup,
}

impl<T: Scalar> PersistenceLandscape<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    /// `λ_1 .. λ_{k_max}`, each sampled on [`grid`](Self::grid).
    pub fn levels(&self) -> &[Vec<T>] {
        &self.levels
    }

    pub fn k_max(&self) -> usize {
        self.levels.len()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::LandscapeMismatch(format!(
                "dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        if self.levels.len() != other.levels.len() {
            return Err(Error::LandscapeMismatch(format!(
                "{} and {} levels",
                self.levels.len(),
                other.levels.len()
            )));
        }
        if self.grid != other.grid {
            return Err(Error::LandscapeMismatch("grids differ".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&LandscapeJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: LandscapeJson<T> = serde_json::from_str(s)?;
        w.try_into()
    }
}

/// Wire layout: `{"dim":k,"grid":[...],"levels":[[...]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LandscapeJson<T> {
    pub dim: usize,
    pub grid: Vec<T>,
    pub levels: Vec<Vec<T>>,
}

impl<T: Scalar> From<&PersistenceLandscape<T>> for LandscapeJson<T> {
    fn from(l: &PersistenceLandscape<T>) -> Self {
        Self {
            dim: l.dim,
            grid: l.grid.clone(),
            levels: l.levels.clone(),
        }
    }
}

impl<T: Scalar> TryFrom<LandscapeJson<T>> for PersistenceLandscape<T> {
    type Error = Error;

    fn try_from(w: LandscapeJson<T>) -> Result<Self> {
        if w.grid.is_empty()
            || w.levels.is_empty()
            || w.levels.iter().any(|l| l.len() != w.grid.len())
        {
            return Err(Error::InvalidLandscape(
                "every level must match the grid length".into(),
            ));
        }
        Ok(Self {
            dim: w.dim,
            grid: w.grid,
            levels: w.levels,
        })
    }
}

/// Common truncation point for a set of diagrams that will be compared:
/// `1.05 ×` the largest finite death, or `1` when there is none.
pub fn shared_t_max<'a, T: Scalar>(
    diagrams: impl IntoIterator<Item = &'a PersistenceDiagram<T>>,
) -> T {
    let max = diagrams
        .into_iter()
        .filter_map(|pd| pd.max_finite_death())
        .fold(T::zero(), |m, d| m.max(d));
    if max > T::zero() {
        max * T::of(T_MAX_FACTOR)
    } else {
        T::one()
    }
}

/// `n_grid` equally spaced points over `[0, t_max]`, both ends included.
pub fn landscape_grid<T: Scalar>(n_grid: usize, t_max: T) -> Vec<T> {
    match n_grid {
        0 => Vec::new(),
        1 => vec![T::zero()],
        n => {
            let step = t_max / T::of_usize(n - 1);
            (0..n)
                .map(|i| {
                    if i + 1 == n {
                        t_max
                    } else {
                        step * T::of_usize(i)
                    }
                })
                .collect()
        }
    }
}

/// `λ_k(t)` = k-th largest of `min(t − b, d − t)₊` over the `dim` pairs.
pub fn landscape<T: Scalar>(
    pd: &PersistenceDiagram<T>,
    dim: usize,
    k_max: usize,
    n_grid: usize,
    t_max: T,
) -> Result<PersistenceLandscape<T>> {
    if k_max == 0 || n_grid == 0 {
        return Err(Error::InvalidLandscape(format!(
            "k_max = {k_max}, n_grid = {n_grid}"
        )));
    }
    if !(t_max > T::zero()) || !t_max.is_finite() {
        return Err(Error::InvalidLandscape(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let points: Vec<(T, T)> = pd
        .dim_pairs(dim)
        .map(|p| (p.birth, p.death.min(t_max)))
        .collect();
    let grid = landscape_grid(n_grid, t_max);
    let mut levels = vec![vec![T::zero(); n_grid]; k_max];
    let mut tents: Vec<T> = Vec::with_capacity(points.len());
    for (i, &t) in grid.iter().enumerate() {
        tents.clear();
        tents.extend(
            points
                .iter()
                .map(|&(b, d)| (t - b).min(d - t))
                .filter(|&v| v > T::zero()),
        );
        tents.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        for (level, &v) in levels.iter_mut().zip(&tents) {
            level[i] = v;
        }
    }
    Ok(PersistenceLandscape { dim, grid, levels })
}

/// Pointwise mean of compatible landscapes.
pub fn landscape_mean<T: Scalar>(
    ls: &[PersistenceLandscape<T>],
) -> Result<PersistenceLandscape<T>> {
    let first = ls
        .first()
        .ok_or_else(|| Error::LandscapeMismatch("cannot average zero landscapes".into()))?;
    for l in &ls[1..] {
        first.check_compatible(l)?;
    }
    let n = T::of_usize(ls.len());
    let levels = (0..first.k_max())
        .map(|k| {
            (0..first.grid.len())
                .map(|i| ls.iter().fold(T::zero(), |acc, l| acc + l.levels[k][i]) / n)
                .collect()
        })
        .collect();
    Ok(PersistenceLandscape {
        dim: first.dim,
        grid: first.grid.clone(),
        levels,
    })
}

pub fn landscape_distance<T: Scalar>(
    a: &PersistenceLandscape<T>,
    b: &PersistenceLandscape<T>,
    norm: LandscapeNorm,
) -> Result<T> {
    a.check_compatible(b)?;
    let diffs = a
        .levels
        .iter()
        .zip(&b.levels)
        .map(|(x, y)| x.iter().zip(y).map(|(&u, &v)| u - v).collect::<Vec<T>>());
    Ok(match norm {
        LandscapeNorm::Sup => diffs
            .flat_map(|d| d.into_iter())
            .fold(T::zero(), |m, v| m.max(v.abs())),
        LandscapeNorm::L2 => {
            let mut total = T::zero();
            for d in diffs {
                for i in 1..a.grid.len() {
                    let h = a.grid[i] - a.grid[i - 1];
                    total += h * T::half() * (d[i - 1] * d[i - 1] + d[i] * d[i]);
                }
            }
            total.sqrt()
        }
    })
}

struct Split<T> {
    finite: Vec<(T, T)>,
    essential: Vec<T>,
}

fn split<T: Scalar>(pd: &PersistenceDiagram<T>, dim: usize) -> Split<T> {
    let mut finite = Vec::new();
    let mut essential = Vec::new();
    for p in pd.dim_pairs(dim) {
        if p.is_essential() {
            essential.push(p.birth);
        } else {
            finite.push((p.birth, p.death));
        }
    }
    essential.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Split { finite, essential }
}

#[inline]
fn linf<T: Scalar>(a: (T, T), b: (T, T)) -> T {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

#[inline]
fn to_diagonal<T: Scalar>(a: (T, T)) -> T {
    (a.1 - a.0) * T::half()
}

/// Cost of pairing slot `i` of `A ∪ Δ(B)` with slot `j` of `B ∪ Δ(A)`.
fn augmented_cost<T: Scalar>(a: &[(T, T)], b: &[(T, T)], i: usize, j: usize) -> T {
    let (n, m) = (a.len(), b.len());
    match (i < n, j < m) {
        (true, true) => linf(a[i], b[j]),
        (true, false) => to_diagonal(a[i]),
        (false, true) => to_diagonal(b[j]),
        (false, false) => T::zero(),
    }
}

/// Bottleneck distance between the `dim` parts of two diagrams; `+∞` when
/// the numbers of essential classes differ.
pub fn bottleneck<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    dim: usize,
) -> T {
    let sa = split(a, dim);
    let sb = split(b, dim);
    if sa.essential.len() != sb.essential.len() {
        return T::infinity();
    }
    let essential = sa
        .essential
        .iter()
        .zip(&sb.essential)
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
    essential.max(finite_bottleneck(&sa.finite, &sb.finite))
}

fn finite_bottleneck<T: Scalar>(a: &[(T, T)], b: &[(T, T)]) -> T {
    let size = a.len() + b.len();
    if size == 0 {
        return T::zero();
    }
    let mut candidates = vec![T::zero()];
    for i in 0..size {
        for j in 0..size {
            candidates.push(augmented_cost(a, b, i, j));
        }
    }
    candidates.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    candidates.dedup();

    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if has_perfect_matching(size, |i, j| augmented_cost(a, b, i, j) <= candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Kuhn's augmenting-path matching on an `n × n` bipartite graph.
fn has_perfect_matching(n: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| edge(i, j)).collect())
        .collect();
    let mut match_right: Vec<Option<usize>> = vec![None; n];

    fn augment(
        u: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        match_right: &mut [Option<usize>],
    ) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if match_right[v].is_none_or(|w| augment(w, adj, seen, match_right)) {
                match_right[v] = Some(u);
                return true;
            }
        }
        false
    }

    for u in 0..n {
        let mut seen = vec![false; n];
        if !augment(u, &adj, &mut seen, &mut match_right) {
            return false;
        }
    }
    true
}

/// `q`-Wasserstein distance (`q ≥ 1`) between the `dim` parts of two diagrams.
pub fn wasserstein<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    dim: usize,
    q: T,
) -> Result<T> {
    if !(q >= T::one()) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Wasserstein exponent must be finite and >= 1, got {q}"
        )));
    }
    let sa = split(a, dim);
    let sb = split(b, dim);
    if sa.essential.len() != sb.essential.len() {
        return Ok(T::infinity());
    }
    let mut total = sa
        .essential
        .iter()
        .zip(&sb.essential)
        .fold(T::zero(), |acc, (x, y)| acc + (*x - *y).abs().powf(q));
    let size = sa.finite.len() + sb.finite.len();
    if size > 0 {
        let cost: Vec<Vec<T>> = (0..size)
            .map(|i| {
                (0..size)
                    .map(|j| augmented_cost(&sa.finite, &sb.finite, i, j).powf(q))
                    .collect()
            })
            .collect();
        let assignment = min_cost_assignment(&cost);
        total += assignment
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, &j)| acc + cost[i][j]);
    }
    Ok(total.powf(T::one() / q))
}

/// Hungarian algorithm with potentials; returns the column assigned to each row.
fn min_cost_assignment<T: Scalar>(cost: &[Vec<T>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based arrays; index 0 is the virtual start column.
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![T::infinity(); n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = T::infinity();
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            assignment[row_of[j] - 1] = j - 1;
        }
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::PersistencePair;

    fn pd(points: &[(usize, f64, f64)]) -> PersistenceDiagram<f64> {
        PersistenceDiagram::new(
            points
                .iter()
                .map(|&(dim, birth, death)| PersistencePair { dim, birth, death })
                .collect(),
        )
    }

    fn sample(l: &PersistenceLandscape<f64>, level: usize, t: f64) -> f64 {
        let i = l
            .grid()
            .iter()
            .position(|&g| (g - t).abs() < 1e-12)
            .expect("grid point");
        l.levels()[level][i]
    }

    #[test]
    fn empty_diagram_gives_zero_landscape() {
        let l = landscape(&pd(&[]), 1, 3, 11, 4.0).unwrap();
        assert!(l.levels().iter().flatten().all(|&v| v == 0.0));
        assert_eq!(l.grid().len(), 11);
        assert_eq!(l.k_max(), 3);
    }

    #[test]
    fn single_tent() {
        let l = landscape(&pd(&[(1, 1.0, 3.0)]), 1, 2, 41, 4.0).unwrap();
        assert_eq!(sample(&l, 0, 2.0), 1.0);
        assert_eq!(sample(&l, 0, 1.5), 0.5);
        assert_eq!(sample(&l, 0, 0.5), 0.0);
        assert_eq!(sample(&l, 0, 3.5), 0.0);
        assert!(l.levels()[1].iter().all(|&v| v == 0.0));
        assert_eq!(l.levels()[0].iter().cloned().fold(0.0, f64::max), 1.0);
    }

    #[test]
    fn repeated_pairs_fill_levels() {
        let one = landscape(&pd(&[(1, 1.0, 3.0)]), 1, 2, 41, 4.0).unwrap();
        let two = landscape(&pd(&[(1, 1.0, 3.0), (1, 1.0, 3.0)]), 1, 2, 41, 4.0).unwrap();
        assert_eq!(two.levels()[0], one.levels()[0]);
        assert_eq!(two.levels()[1], one.levels()[0]);
    }

    #[test]
    fn essential_pairs_are_truncated() {
        let l = landscape(&pd(&[(0, 0.0, f64::INFINITY)]), 0, 1, 5, 2.0).unwrap();
        // tent of (0, 2): 0, 0.5, 1, 0.5, 0
        assert_eq!(l.levels()[0], vec![0.0, 0.5, 1.0, 0.5, 0.0]);
    }

    #[test]
    fn other_dimensions_are_ignored() {
        let l = landscape(&pd(&[(0, 0.0, 1.0), (2, 0.5, 1.5)]), 1, 2, 9, 2.0).unwrap();
        assert!(l.levels().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn invalid_parameters() {
        assert!(landscape(&pd(&[]), 0, 0, 5, 1.0).is_err());
        assert!(landscape(&pd(&[]), 0, 1, 0, 1.0).is_err());
        assert!(landscape(&pd(&[]), 0, 1, 5, 0.0).is_err());
    }

    #[test]
    fn mean_rules() {
        let l = landscape(&pd(&[(1, 0.2, 1.0), (1, 0.4, 0.9)]), 1, 3, 21, 1.2).unwrap();
        assert_eq!(landscape_mean(std::slice::from_ref(&l)).unwrap(), l);
        let zero = landscape(&pd(&[]), 1, 3, 21, 1.2).unwrap();
        let half = landscape_mean(&[l.clone(), zero]).unwrap();
        for (h, o) in half
            .levels()
            .iter()
            .flatten()
            .zip(l.levels().iter().flatten())
        {
            assert_eq!(*h, o / 2.0);
        }
        for i in 0..21 {
            assert!(half.levels()[0][i] >= half.levels()[1][i]);
        }
        let other_grid = landscape(&pd(&[]), 1, 3, 20, 1.2).unwrap();
        assert!(matches!(
            landscape_mean(&[l.clone(), other_grid]),
            Err(Error::LandscapeMismatch(_))
        ));
        let other_dim = landscape(&pd(&[]), 0, 3, 21, 1.2).unwrap();
        assert!(landscape_mean(&[l, other_dim]).is_err());
        assert!(landscape_mean::<f64>(&[]).is_err());
    }

    #[test]
    fn distance_rules() {
        let a = landscape(&pd(&[(1, 1.0, 3.0)]), 1, 2, 81, 4.0).unwrap();
        let b = landscape(&pd(&[(1, 0.5, 2.0), (1, 1.0, 1.5)]), 1, 2, 81, 4.0).unwrap();
        let zero = landscape(&pd(&[]), 1, 2, 81, 4.0).unwrap();
        for norm in [LandscapeNorm::L2, LandscapeNorm::Sup] {
            assert_eq!(landscape_distance(&a, &a, norm).unwrap(), 0.0);
            assert_eq!(
                landscape_distance(&a, &b, norm).unwrap(),
                landscape_distance(&b, &a, norm).unwrap()
            );
        }
        assert_eq!(
            landscape_distance(&a, &zero, LandscapeNorm::Sup).unwrap(),
            1.0
        );
        // ∫ tent² over [1, 3] = 2/3; grid points hit the kinks so only trapezoid error remains.
        let l2 = landscape_distance(&a, &zero, LandscapeNorm::L2).unwrap();
        assert!((l2 - (2.0f64 / 3.0).sqrt()).abs() < 1e-3, "{l2}");
    }

    #[test]
    fn bottleneck_examples() {
        let a = pd(&[(1, 0.0, 2.0)]);
        assert_eq!(bottleneck(&a, &a, 1), 0.0);
        assert_eq!(bottleneck(&a, &pd(&[]), 1), 1.0);
        assert_eq!(bottleneck(&a, &pd(&[(1, 0.5, 2.5)]), 1), 0.5);
        // Far apart: both go to the diagonal.
        assert!((bottleneck(&pd(&[(1, 0.0, 0.2)]), &pd(&[(1, 5.0, 5.4)]), 1) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn essential_classes_must_pair_up() {
        let a = pd(&[(0, 0.0, f64::INFINITY), (0, 0.0, 1.0)]);
        let b = pd(&[(0, 0.25, f64::INFINITY)]);
        assert_eq!(bottleneck(&a, &b, 0), 0.5);
        assert_eq!(wasserstein(&a, &b, 0, 1.0).unwrap(), 0.75);
        let none = pd(&[(0, 0.0, 1.0)]);
        assert!(bottleneck(&a, &none, 0).is_infinite());
        assert!(wasserstein(&a, &none, 0, 2.0).unwrap().is_infinite());
    }

    #[test]
    fn wasserstein_examples() {
        let a = pd(&[(1, 0.0, 2.0)]);
        assert_eq!(wasserstein(&a, &a, 1, 1.0).unwrap(), 0.0);
        assert_eq!(wasserstein(&a, &pd(&[]), 1, 1.0).unwrap(), 1.0);
        assert_eq!(
            wasserstein(&pd(&[(1, 0.0, 2.0), (1, 0.0, 2.0)]), &pd(&[]), 1, 1.0).unwrap(),
            2.0
        );
        let q2 = wasserstein(&pd(&[(1, 0.0, 2.0), (1, 0.0, 2.0)]), &pd(&[]), 1, 2.0).unwrap();
        assert!((q2 - 2f64.sqrt()).abs() < 1e-15);
        assert!(wasserstein(&a, &a, 1, 0.5).is_err());
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let cost = vec![
            vec![4.0, 1.0, 3.0, 2.0],
            vec![2.0, 0.0, 5.0, 3.0],
            vec![3.0, 2.0, 2.0, 1.0],
            vec![1.0, 4.0, 3.0, 2.0],
        ];
        let a = min_cost_assignment(&cost);
        let got: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        let mut best = f64::INFINITY;
        let mut perm = [0, 1, 2, 3];
        permutations(&mut perm, 0, &mut |p| {
            best = best.min(p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum());
        });
        assert_eq!(got, best);
    }

    fn permutations(p: &mut [usize; 4], k: usize, f: &mut impl FnMut(&[usize; 4])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permutations(p, k + 1, f);
            p.swap(k, i);
        }
    }

    #[test]
    fn landscape_json_roundtrip() {
        let l = landscape(&pd(&[(1, 1.0, 3.0)]), 1, 2, 5, 4.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&l.to_json().unwrap()).unwrap();
        assert_eq!(v["dim"], 1);
        assert_eq!(v["grid"].as_array().unwrap().len(), 5);
        assert_eq!(v["levels"][0][2], 1.0);
        assert_eq!(
            PersistenceLandscape::<f64>::from_json(&l.to_json().unwrap()).unwrap(),
            l
        );
    }

    #[test]
    fn shared_truncation() {
        let a = pd(&[(0, 0.0, 1.0), (0, 0.0, f64::INFINITY)]);
        let b = pd(&[(1, 0.5, 2.0)]);
        assert!((shared_t_max([&a, &b]) - 2.1).abs() < 1e-15);
        assert_eq!(shared_t_max([&pd(&[(0, 0.0, f64::INFINITY)])]), 1.0);
    }
}
