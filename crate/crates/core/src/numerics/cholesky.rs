use std::collections::VecDeque;

use super::{norm2, SparseSymMatrix};
use crate::{Error, Result};

/// Reverse Cuthill–McKee ordering. Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        let root = pseudo_peripheral(adj, start, &degree);
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// BFS levels from `root`: (eccentricity, last level).
fn bfs_levels(adj: &[Vec<usize>], root: usize) -> (usize, Vec<usize>) {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut last = vec![root];
    let mut ecc = 0;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                if dist[w] > ecc {
                    ecc = dist[w];
                    last.clear();
                }
                if dist[w] == ecc {
                    last.push(w);
                }
                queue.push_back(w);
            }
        }
    }
    (ecc, last)
}

fn pseudo_peripheral(adj: &[Vec<usize>], start: usize, degree: &[usize]) -> usize {
    let mut root = start;
    let (mut ecc, mut last) = bfs_levels(adj, root);
    for _ in 0..10 {
        let cand = *last.iter().min_by_key(|&&w| (degree[w], w)).unwrap();
        let (e2, l2) = bfs_levels(adj, cand);
        if e2 <= ecc {
            break;
        }
        root = cand;
        ecc = e2;
        last = l2;
    }
    root
}

/// Envelope (profile) Cholesky factor of a symmetric positive definite
/// matrix under a reverse Cuthill–McKee permutation.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    /// perm[new] = old
    perm: Vec<usize>,
    /// First stored column of each permuted row.
    first: Vec<usize>,
    /// Offset of row i's envelope in `data`.
    offset: Vec<usize>,
    data: Vec<f64>,
    #[cfg(debug_assertions)]
    matrix: SparseSymMatrix,
}

impl CholeskyFactor {
    pub fn new(a: &SparseSymMatrix) -> Result<Self> {
        let n = a.dim();
        let perm = reverse_cuthill_mckee(&a.adjacency());
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for old_i in 0..n {
            for (old_j, _) in a.lower_row(old_i) {
                let (i, j) = (inv[old_i], inv[old_j]);
                let (r, c) = if i >= j { (i, j) } else { (j, i) };
                first[r] = first[r].min(c);
            }
        }
        let mut offset = vec![0usize; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; offset[n]];
        for old_i in 0..n {
            for (old_j, v) in a.lower_row(old_i) {
                let (i, j) = (inv[old_i], inv[old_j]);
                let (r, c) = if i >= j { (i, j) } else { (j, i) };
                data[offset[r] + c - first[r]] = v;
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let ri = offset[i] + (k0 - fi);
                let rj = offset[j] + (k0 - fj);
                let len = j - k0;
                let s: f64 = data[ri..ri + len]
                    .iter()
                    .zip(&data[rj..rj + len])
                    .map(|(x, y)| x * y)
                    .sum();
                let ljj = data[offset[j] + j - fj];
                let idx = offset[i] + j - fi;
                data[idx] = (data[idx] - s) / ljj;
            }
            let row = &data[offset[i]..offset[i] + (i - fi)];
            let s: f64 = row.iter().map(|x| x * x).sum();
            let idx = offset[i] + i - fi;
            let pivot = data[idx] - s;
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    row: perm[i],
                    pivot,
                });
            }
            data[idx] = pivot.sqrt();
        }
        Ok(CholeskyFactor {
            n,
            perm,
            first,
            offset,
            data,
            #[cfg(debug_assertions)]
            matrix: a.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored envelope entries.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let s: f64 = row[..i - fi]
                .iter()
                .zip(&y[fi..i])
                .map(|(l, v)| l * v)
                .sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for (k, l) in (fi..i).zip(row) {
                y[k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        #[cfg(debug_assertions)]
        {
            let r = self.matrix.spmv(&x)?;
            let res: Vec<f64> = r.iter().zip(b).map(|(a, b)| a - b).collect();
            let nb = norm2(b);
            debug_assert!(
                nb == 0.0 || norm2(&res) <= 1e-8 * nb,
                "Cholesky residual {:e}",
                norm2(&res) / nb
            );
        }
        #[cfg(not(debug_assertions))]
        let _ = norm2;
        Ok(x)
    }
}

/// Factor and solve in one call.
pub fn cholesky_solve(a: &SparseSymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    CholeskyFactor::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| {
            if rng.random::<f64>() < 0.15 {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            }
        });
        b.transpose() * &b + DMatrix::identity(n, n)
    }

    #[test]
    fn identity_solve() {
        let b = vec![1.0, 2.0, 3.0];
        assert_eq!(
            cholesky_solve(&SparseSymMatrix::identity(3), &b).unwrap(),
            b
        );
    }

    #[test]
    fn one_by_one() {
        let a = SparseSymMatrix::from_triplets(1, &[(0, 0, 4.0)]).unwrap();
        assert_eq!(cholesky_solve(&a, &[8.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn random_spd_matches_dense() {
        let d = random_spd(40, 4);
        let a = SparseSymMatrix::from_dense(&d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = cholesky_solve(&a, &b).unwrap();
        let xd = d.clone().cholesky().unwrap().solve(&DVector::from_vec(b.clone()));
        for i in 0..40 {
            assert!((x[i] - xd[i]).abs() < 1e-10);
        }
        let r = a.spmv(&x).unwrap();
        let res: f64 = r.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        assert!(res <= 1e-12 * norm2(&b));
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = SparseSymMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(
            CholeskyFactor::new(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn rcm_is_a_permutation_and_shrinks_band_of_shuffled_path() {
        // path graph with shuffled labels
        let n = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut labels: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            labels.swap(i, rng.random_range(0..=i));
        }
        let mut adj = vec![Vec::new(); n];
        for k in 0..n - 1 {
            adj[labels[k]].push(labels[k + 1]);
            adj[labels[k + 1]].push(labels[k]);
        }
        let p = reverse_cuthill_mckee(&adj);
        let mut seen = p.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let mut inv = vec![0; n];
        for (new, &old) in p.iter().enumerate() {
            inv[old] = new;
        }
        let band = (0..n)
            .flat_map(|i| adj[i].iter().map(move |&j| (i, j)))
            .map(|(i, j)| inv[i].abs_diff(inv[j]))
            .max()
            .unwrap();
        assert_eq!(band, 1);
    }
}
