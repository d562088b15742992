//! Vietoris-Rips filtrations on a distance matrix and their persistent
//! homology over the two-element field.
//!
//! A simplex enters the filtration at the largest pairwise distance among its
//! vertices. Simplices are ordered by `(value, dimension, vertices)`, which is
//! a valid face-before-coface order, and the boundary matrix is reduced column
//! by column with the clearing optimisation.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::decomp::DistanceMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default top homology dimension.
pub const DEFAULT_MAX_DIM: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex<T> {
    vertices: Vec<usize>,
    value: T,
}

impl<T: Scalar> Simplex<T> {
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn value(&self) -> T {
        self.value
    }

    /// Codimension-one faces in lexicographic order.
    pub fn faces(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let n = self.vertices.len();
        let skip = if n > 1 { 0..n } else { 0..0 };
        skip.rev().map(move |i| {
            let mut f = self.vertices.clone();
            f.remove(i);
            f
        })
    }
}

fn filtration_order<T: Scalar>(a: &Simplex<T>, b: &Simplex<T>) -> Ordering {
    a.value
        .partial_cmp(&b.value)
        .unwrap_or(Ordering::Equal)
        .then(a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

#[derive(Debug, Clone)]
pub struct Filtration<T> {
    simplices: Vec<Simplex<T>>,
    n_nodes: usize,
    max_dim: usize,
}

impl<T: Scalar> Filtration<T> {
    pub fn simplices(&self) -> &[Simplex<T>] {
        &self.simplices
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Highest homology dimension computed from this filtration.
    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Position of every simplex, keyed by its vertex list.
    fn index(&self) -> HashMap<&[usize], usize> {
        self.simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.vertices.as_slice(), i))
            .collect()
    }
}

/// All simplices of dimension `≤ max_dim + 1` on the nodes of `d`.
pub fn rips_filtration<T: Scalar>(d: &DistanceMatrix<T>, max_dim: usize) -> Result<Filtration<T>> {
    if !(1..=2).contains(&max_dim) {
        return Err(Error::InvalidMaxDim(max_dim));
    }
    let n = d.len();
    let mut simplices = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(max_dim + 2);
    enumerate_cliques(d, n, max_dim + 2, 0, &mut stack, T::zero(), &mut simplices);
    simplices.sort_by(filtration_order);
    Ok(Filtration {
        simplices,
        n_nodes: n,
        max_dim,
    })
}

fn enumerate_cliques<T: Scalar>(
    d: &DistanceMatrix<T>,
    n: usize,
    max_size: usize,
    start: usize,
    stack: &mut Vec<usize>,
    value: T,
    out: &mut Vec<Simplex<T>>,
) {
    for v in start..n {
        let mut val = value;
        for &u in stack.iter() {
            val = val.max(d.get(u, v));
        }
        stack.push(v);
        out.push(Simplex {
            vertices: stack.clone(),
            value: val,
        });
        if stack.len() < max_size {
            enumerate_cliques(d, n, max_size, v + 1, stack, val, out);
        }
        stack.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair<T> {
    pub dim: usize,
    pub birth: T,
    /// `+∞` for essential classes.
    pub death: T,
}

impl<T: Scalar> PersistencePair<T> {
    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> T {
        self.death - self.birth
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram<T> {
    pairs: Vec<PersistencePair<T>>,
}

impl<T: Scalar> PersistenceDiagram<T> {
    /// Builds a diagram, dropping zero-persistence pairs and sorting by
    /// `(dim, birth, death)`.
    pub fn new(mut pairs: Vec<PersistencePair<T>>) -> Self {
        pairs.retain(|p| p.death > p.birth);
        pairs.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.partial_cmp(&b.birth).unwrap_or(Ordering::Equal))
                .then(a.death.partial_cmp(&b.death).unwrap_or(Ordering::Equal))
        });
        Self { pairs }
    }

    pub fn pairs(&self) -> &[PersistencePair<T>] {
        &self.pairs
    }

    pub fn dim_pairs(&self, dim: usize) -> impl Iterator<Item = &PersistencePair<T>> + '_ {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sum of `death − birth` over finite pairs of one dimension.
    pub fn total_persistence(&self, dim: usize) -> T {
        self.dim_pairs(dim)
            .filter(|p| !p.is_essential())
            .fold(T::zero(), |acc, p| acc + p.persistence())
    }

    /// Largest finite death in the diagram, if any.
    pub fn max_finite_death(&self) -> Option<T> {
        self.pairs
            .iter()
            .filter(|p| !p.is_essential())
            .map(|p| p.death)
            .fold(None, |m, d| Some(m.map_or(d, |m: T| m.max(d))))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&DiagramJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: DiagramJson<T> = serde_json::from_str(s)?;
        w.try_into()
    }
}

/// Persistence pairs of `f` for dimensions `0..=f.max_dim()`.
pub fn persistence<T: Scalar>(f: &Filtration<T>) -> PersistenceDiagram<T> {
    let n = f.simplices.len();
    let index = f.index();
    let top = f.max_dim + 1;

    // Boundary columns as sorted row indices; vertices have empty boundary.
    let boundary = |j: usize| -> Vec<usize> {
        let mut col: Vec<usize> = f.simplices[j]
            .faces()
            .map(|face| {
                *index
                    .get(face.as_slice())
                    .expect("filtration is closed under faces")
            })
            .collect();
        col.sort_unstable();
        col
    };

    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    for (j, s) in f.simplices.iter().enumerate() {
        by_dim[s.dim()].push(j);
    }

    // pivot_owner[i] = column whose reduced lowest entry is row i.
    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    let mut reduced: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut killer = vec![false; n];

    for dim in (1..=top).rev() {
        for &j in &by_dim[dim] {
            if pivot_owner[j].is_some() {
                // Cleared: j is a pivot of a higher column, so its own column reduces to zero.
                continue;
            }
            let mut col = boundary(j);
            while let Some(&low) = col.last() {
                match pivot_owner[low] {
                    Some(other) => add_mod2(&mut col, &reduced[&other]),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                pivot_owner[low] = Some(j);
                killer[j] = true;
                reduced.insert(j, col);
            }
        }
    }

    let mut pairs = Vec::new();
    for (i, owner) in pivot_owner.iter().enumerate() {
        if let Some(j) = owner {
            let s = &f.simplices[i];
            if s.dim() <= f.max_dim {
                pairs.push(PersistencePair {
                    dim: s.dim(),
                    birth: s.value,
                    death: f.simplices[*j].value,
                });
            }
        }
    }
    for (i, s) in f.simplices.iter().enumerate() {
        if s.dim() <= f.max_dim && !killer[i] && pivot_owner[i].is_none() {
            pairs.push(PersistencePair {
                dim: s.dim(),
                birth: s.value,
                death: T::infinity(),
            });
        }
    }
    PersistenceDiagram::new(pairs)
}

/// Symmetric difference of two sorted index lists, in place.
fn add_mod2(col: &mut Vec<usize>, other: &[usize]) {
    let mut out = Vec::with_capacity(col.len() + other.len());
    let (mut a, mut b) = (0, 0);
    while a < col.len() && b < other.len() {
        match col[a].cmp(&other[b]) {
            Ordering::Less => {
                out.push(col[a]);
                a += 1;
            }
            Ordering::Greater => {
                out.push(other[b]);
                b += 1;
            }
            Ordering::Equal => {
                a += 1;
                b += 1;
            }
        }
    }
    out.extend_from_slice(&col[a..]);
    out.extend_from_slice(&other[b..]);
    *col = out;
}

/// Number of `dim`-classes alive at `epsilon` (`birth ≤ ε < death`).
pub fn betti_at<T: Scalar>(pd: &PersistenceDiagram<T>, epsilon: T, dim: usize) -> usize {
    pd.dim_pairs(dim)
        .filter(|p| p.birth <= epsilon && epsilon < p.death)
        .count()
}

/// Wire layout: `{"pairs":[{"dim":k,"birth":b,"death":d_or_"inf"}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DiagramJson<T> {
    pub pairs: Vec<PairJson<T>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PairJson<T> {
    pub dim: usize,
    pub birth: T,
    pub death: DeathJson<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, bound = "T: Scalar")]
pub enum DeathJson<T> {
    Finite(T),
    Label(String),
}

impl<T: Scalar> From<&PersistenceDiagram<T>> for DiagramJson<T> {
    fn from(pd: &PersistenceDiagram<T>) -> Self {
        Self {
            pairs: pd
                .pairs
                .iter()
                .map(|p| PairJson {
                    dim: p.dim,
                    birth: p.birth,
                    death: if p.is_essential() {
                        DeathJson::Label("inf".into())
                    } else {
                        DeathJson::Finite(p.death)
                    },
                })
                .collect(),
        }
    }
}

impl<T: Scalar> TryFrom<DiagramJson<T>> for PersistenceDiagram<T> {
    type Error = Error;

    fn try_from(w: DiagramJson<T>) -> Result<Self> {
        let mut pairs = Vec::with_capacity(w.pairs.len());
        for p in w.pairs {
            let death = match p.death {
                DeathJson::Finite(v) => v,
                DeathJson::Label(s) if s == "inf" => T::infinity(),
                DeathJson::Label(s) => {
                    return Err(Error::InvalidMatrix(format!(
                        "death must be a number or \"inf\", got {s:?}"
                    )))
                }
            };
            if p.dim > 2 || !p.birth.is_finite() || p.birth < T::zero() || !(death > p.birth) {
                return Err(Error::InvalidMatrix(format!(
                    "invalid persistence pair dim={} birth={} death={}",
                    p.dim, p.birth, death
                )));
            }
            pairs.push(PersistencePair {
                dim: p.dim,
                birth: p.birth,
                death,
            });
        }
        Ok(PersistenceDiagram::new(pairs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn dm(rows: &[Vec<f64>]) -> DistanceMatrix<f64> {
        DistanceMatrix::with_default_labels(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    fn unit_triangle() -> DistanceMatrix<f64> {
        dm(&[
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
    }

    /// 0-1-2-3-0 square: sides 1, diagonals 2.
    fn square() -> DistanceMatrix<f64> {
        dm(&[
            vec![0.0, 1.0, 2.0, 1.0],
            vec![1.0, 0.0, 1.0, 2.0],
            vec![2.0, 1.0, 0.0, 1.0],
            vec![1.0, 2.0, 1.0, 0.0],
        ])
    }

    fn as_tuples(pd: &PersistenceDiagram<f64>) -> Vec<(usize, f64, f64)> {
        pd.pairs()
            .iter()
            .map(|p| (p.dim, p.birth, p.death))
            .collect()
    }

    #[test]
    fn triangle_filtration_enumeration() {
        let f = rips_filtration(&unit_triangle(), 1).unwrap();
        let counts: Vec<usize> = (0..=2)
            .map(|k| f.simplices().iter().filter(|s| s.dim() == k).count())
            .collect();
        assert_eq!(counts, vec![3, 3, 1]);
        assert!(f
            .simplices()
            .iter()
            .filter(|s| s.dim() == 0)
            .all(|s| s.value() == 0.0));
        assert!(f
            .simplices()
            .iter()
            .filter(|s| s.dim() > 0)
            .all(|s| s.value() == 1.0));
    }

    #[test]
    fn filtration_order_is_face_first_and_closed() {
        let f = rips_filtration(&square(), 2).unwrap();
        let index = f.index();
        for (j, s) in f.simplices().iter().enumerate() {
            for face in s.faces() {
                let i = index[face.as_slice()];
                assert!(i < j);
                assert!(f.simplices()[i].value() <= s.value());
            }
        }
        // 4 + 6 + 4 + 1
        assert_eq!(f.len(), 15);
    }

    #[test]
    fn single_node_and_bad_dim() {
        let f = rips_filtration(&dm(&[vec![0.0]]), 2).unwrap();
        assert_eq!(f.len(), 1);
        let pd = persistence(&f);
        assert_eq!(as_tuples(&pd), vec![(0, 0.0, f64::INFINITY)]);
        assert!(matches!(
            rips_filtration(&unit_triangle(), 0),
            Err(Error::InvalidMaxDim(0))
        ));
        assert!(matches!(
            rips_filtration(&unit_triangle(), 3),
            Err(Error::InvalidMaxDim(3))
        ));
    }

    #[test]
    fn all_zero_distances() {
        let d = dm(&vec![vec![0.0; 5]; 5]);
        let f = rips_filtration(&d, 2).unwrap();
        assert!(f.simplices().iter().all(|s| s.value() == 0.0));
        assert_eq!(as_tuples(&persistence(&f)), vec![(0, 0.0, f64::INFINITY)]);
    }

    #[test]
    fn unit_triangle_diagram() {
        let pd = persistence(&rips_filtration(&unit_triangle(), 1).unwrap());
        assert_eq!(
            as_tuples(&pd),
            vec![(0, 0.0, 1.0), (0, 0.0, 1.0), (0, 0.0, f64::INFINITY)]
        );
        assert_eq!(betti_at(&pd, 0.5, 0), 3);
        assert_eq!(betti_at(&pd, 1.0, 0), 1);
        assert_eq!(betti_at(&pd, 0.5, 1), 0);
    }

    #[test]
    fn square_cycle_diagram() {
        for max_dim in [1, 2] {
            let pd = persistence(&rips_filtration(&square(), max_dim).unwrap());
            assert_eq!(
                as_tuples(&pd),
                vec![
                    (0, 0.0, 1.0),
                    (0, 0.0, 1.0),
                    (0, 0.0, 1.0),
                    (0, 0.0, f64::INFINITY),
                    (1, 1.0, 2.0)
                ]
            );
            assert_eq!(betti_at(&pd, 1.5, 1), 1);
            assert_eq!(betti_at(&pd, 2.0, 1), 0);
        }
    }

    #[test]
    fn isolated_nodes_merge_at_once() {
        let n = 6;
        let d = dm(&(0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 0.7 }).collect())
            .collect::<Vec<_>>());
        let pd = persistence(&rips_filtration(&d, 2).unwrap());
        let h0: Vec<_> = pd.dim_pairs(0).map(|p| (p.birth, p.death)).collect();
        assert_eq!(h0.len(), n);
        assert_eq!(h0.iter().filter(|p| p.1 == 0.7).count(), n - 1);
        assert_eq!(pd.dim_pairs(1).count() + pd.dim_pairs(2).count(), 0);
    }

    #[test]
    fn octahedron_has_a_void() {
        // Cross-polytope: antipodal pairs at distance 2, everything else at 1.
        let n = 6;
        let d = dm(&(0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            0.0
                        } else if i / 2 == j / 2 {
                            2.0
                        } else {
                            1.0
                        }
                    })
                    .collect()
            })
            .collect::<Vec<_>>());
        let pd = persistence(&rips_filtration(&d, 2).unwrap());
        let h2: Vec<_> = pd.dim_pairs(2).map(|p| (p.birth, p.death)).collect();
        assert_eq!(h2, vec![(1.0, 2.0)]);
        assert_eq!(pd.dim_pairs(1).count(), 0);
    }

    #[test]
    fn json_uses_inf_label() {
        let pd = persistence(&rips_filtration(&square(), 1).unwrap());
        let json = pd.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let pairs = v["pairs"].as_array().unwrap();
        assert_eq!(pairs.len(), 5);
        assert_eq!(pairs[3]["death"], "inf");
        assert_eq!(pairs[4]["dim"], 1);
        assert_eq!(pairs[4]["death"], 2.0);
        assert_eq!(PersistenceDiagram::<f64>::from_json(&json).unwrap(), pd);
        assert!(PersistenceDiagram::<f64>::from_json(
            r#"{"pairs":[{"dim":0,"birth":0,"death":"never"}]}"#
        )
        .is_err());
    }

    #[test]
    fn json_floats_round_trip_exactly() {
        let deaths = [
            0.00021520185329521047,
            0.026239883284294354,
            0.1 + 0.2,
            1.0 / 3.0,
            5e-324,
        ];
        let pd = PersistenceDiagram::new(
            deaths
                .iter()
                .map(|&death| PersistencePair {
                    dim: 0,
                    birth: 0.0,
                    death,
                })
                .collect(),
        );
        assert_eq!(
            PersistenceDiagram::<f64>::from_json(&pd.to_json().unwrap()).unwrap(),
            pd
        );
    }

    #[test]
    fn total_persistence_ignores_essential() {
        let pd = persistence(&rips_filtration(&square(), 1).unwrap());
        assert_eq!(pd.total_persistence(0), 3.0);
        assert_eq!(pd.total_persistence(1), 1.0);
        assert_eq!(pd.max_finite_death(), Some(2.0));
    }
}
