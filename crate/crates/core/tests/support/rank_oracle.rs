//! Persistence pairs recovered from ranks of persistent homology groups.
//!
//! Works on at most 6 nodes so every chain fits in a `u64` bitmask. For each
//! pair of realized thresholds `v_i ≤ v_j` the persistent Betti number
//! `β^{i,j} = dim(Z(K_i) + B(K_j)) − dim B(K_j)` is computed by
//! Gaussian elimination over GF(2), and multiplicities follow from
//! inclusion-exclusion.

#![allow(dead_code, clippy::needless_range_loop)]

/// `(dim, birth, death)` with `death = f64::INFINITY` for essential classes.
pub type Pair = (usize, f64, f64);

struct Cell {
    vertices: Vec<usize>,
    value: f64,
}

fn cells(dist: &[Vec<f64>], dim: usize) -> Vec<Cell> {
    let n = dist.len();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    while let Some(s) = stack.pop() {
        if s.len() == dim + 1 {
            let mut value = 0.0f64;
            for a in 0..s.len() {
                for b in a + 1..s.len() {
                    value = value.max(dist[s[a]][s[b]]);
                }
            }
            out.push(Cell { vertices: s, value });
            continue;
        }
        for v in s[s.len() - 1] + 1..n {
            let mut t = s.clone();
            t.push(v);
            stack.push(t);
        }
    }
    out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    out
}

/// Boundary of each `dim`-cell as a bitmask over the `(dim-1)`-cells.
fn boundary(higher: &[Cell], lower: &[Cell]) -> Vec<u64> {
    higher
        .iter()
        .map(|c| {
            let mut mask = 0u64;
            if c.vertices.len() > 1 {
                for skip in 0..c.vertices.len() {
                    let face: Vec<usize> = c
                        .vertices
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    let idx = lower.iter().position(|l| l.vertices == face).unwrap();
                    mask |= 1 << idx;
                }
            }
            mask
        })
        .collect()
}

fn rank(vectors: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &v in vectors {
        let mut x = v;
        for &b in &basis {
            x = x.min(x ^ b);
        }
        if x != 0 {
            basis.push(x);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// Basis of the kernel of the boundary map restricted to `chosen` cells.
fn cycles(bd: &[u64], chosen: &[usize]) -> Vec<u64> {
    // Rows are (boundary image, chain) pairs; eliminate on the image part.
    let mut rows: Vec<(u64, u64)> = chosen.iter().map(|&i| (bd[i], 1u64 << i)).collect();
    let mut kernel = Vec::new();
    let mut pivots: Vec<(u64, u64)> = Vec::new();
    for row in rows.drain(..) {
        let (mut img, mut chain) = row;
        loop {
            if img == 0 {
                kernel.push(chain);
                break;
            }
            let top = 63 - img.leading_zeros();
            match pivots.iter().find(|(p, _)| 63 - p.leading_zeros() == top) {
                Some(&(pi, pc)) => {
                    img ^= pi;
                    chain ^= pc;
                }
                None => {
                    pivots.push((img, chain));
                    break;
                }
            }
        }
    }
    kernel
}

/// All persistence pairs of dims `0..=max_dim` with positive persistence.
pub fn rank_pairs(dist: &[Vec<f64>], max_dim: usize) -> Vec<Pair> {
    assert!(dist.len() <= 6, "oracle limited to 6 nodes");
    let by_dim: Vec<Vec<Cell>> = (0..=max_dim + 1).map(|k| cells(dist, k)).collect();
    let mut values: Vec<f64> = by_dim.iter().flatten().map(|c| c.value).collect();
    values.push(0.0);
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    let nv = values.len();

    let mut out = Vec::new();
    for p in 0..=max_dim {
        let bd_p: Vec<u64> = if p == 0 {
            vec![0; by_dim[0].len()]
        } else {
            boundary(&by_dim[p], &by_dim[p - 1])
        };
        let bd_up = boundary(&by_dim[p + 1], &by_dim[p]);
        let z: Vec<Vec<u64>> = values
            .iter()
            .map(|&v| {
                let chosen: Vec<usize> = (0..by_dim[p].len())
                    .filter(|&i| by_dim[p][i].value <= v)
                    .collect();
                cycles(&bd_p, &chosen)
            })
            .collect();
        let b: Vec<Vec<u64>> = values
            .iter()
            .map(|&v| {
                (0..by_dim[p + 1].len())
                    .filter(|&i| by_dim[p + 1][i].value <= v)
                    .map(|i| bd_up[i])
                    .collect()
            })
            .collect();
        let beta = |i: isize, j: usize| -> i64 {
            if i < 0 {
                return 0;
            }
            let zi = &z[i as usize];
            let bj = &b[j];
            let sum: Vec<u64> = zi.iter().chain(bj.iter()).copied().collect();
            rank(&sum) as i64 - rank(bj) as i64
        };
        for i in 0..nv {
            let ii = i as isize;
            for j in i + 1..nv {
                let mu = beta(ii, j - 1) - beta(ii, j) - beta(ii - 1, j - 1) + beta(ii - 1, j);
                assert!(mu >= 0, "negative multiplicity");
                for _ in 0..mu {
                    out.push((p, values[i], values[j]));
                }
            }
            let mu = beta(ii, nv - 1) - beta(ii - 1, nv - 1);
            assert!(mu >= 0, "negative multiplicity");
            for _ in 0..mu {
                out.push((p, values[i], f64::INFINITY));
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}
