use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Symmetric matrix stored as the compressed rows of its lower triangle
/// (diagonal included). Column indices are sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates (row, col, value) contributions; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        TripletBuilder {
            n,
            entries: Vec::new(),
        }
    }

    /// Adds `v` at (i, j); upper-triangle entries are mirrored to the lower
    /// triangle, so callers may add either half or both halves consistently.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if i >= j {
            self.entries.push((i, j, v));
        } else {
            self.entries.push((j, i, v));
        }
    }

    /// Adds only entries with `i >= j`, ignoring the strict upper triangle.
    /// Use when scattering full symmetric element matrices.
    pub fn add_lower(&mut self, i: usize, j: usize, v: f64) {
        if i >= j {
            self.entries.push((i, j, v));
        }
    }

    pub fn build(self) -> Result<SparseSymMatrix> {
        SparseSymMatrix::from_lower_triplets(self.n, self.entries)
    }
}

impl SparseSymMatrix {
    fn from_lower_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if let Some(&(i, j, _)) = t.iter().find(|&&(i, _, _)| i >= n) {
            return Err(Error::IndexOutOfRange(format!("({i}, {j}) in {n}x{n} matrix")));
        }
        t.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut k = 0;
        for row in 0..n {
            while k < t.len() && t[k].0 == row {
                let col = t[k].1;
                let mut v = 0.0;
                while k < t.len() && t[k].0 == row && t[k].1 == col {
                    v += t[k].2;
                    k += 1;
                }
                if v != 0.0 {
                    col_idx.push(col);
                    values.push(v);
                }
            }
            row_ptr[row + 1] = col_idx.len();
        }
        Ok(SparseSymMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds from arbitrary symmetric triplets; entries above the diagonal are
    /// folded onto their mirror, so pass each off-diagonal pair once.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut b = TripletBuilder::new(n);
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange(format!("({i}, {j}) in {n}x{n} matrix")));
            }
            b.add(i, j, v);
        }
        b.build()
    }

    /// Lower triangle of a dense symmetric matrix.
    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        let mut b = TripletBuilder::new(a.nrows());
        for i in 0..a.nrows() {
            for j in 0..=i {
                b.add_lower(i, j, a[(i, j)]);
            }
        }
        b.build()
    }

    pub fn identity(n: usize) -> Self {
        SparseSymMatrix {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored (lower-triangle) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row `i` of the lower triangle as (column, value) pairs.
    pub fn lower_row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// y = A x with the upper triangle implied by symmetry.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        if y.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: y.len(),
            });
        }
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let a = self.values[k];
                acc += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
            y[i] += acc;
        }
        Ok(())
    }

    /// Adjacency lists of the symmetric sparsity pattern (diagonal excluded).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for (j, _) in self.lower_row(i) {
                if j != i {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.lower_row(i) {
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        d
    }

    /// Maximum |A_ij - A_ji| is zero by construction; this reports the largest
    /// absolute entry, used to scale symmetry and kernel checks.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// One "row col value" line per stored lower-triangle entry.
    pub fn write_triplets(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
        );
        for i in 0..self.n {
            for (j, v) in self.lower_row(i) {
                writeln!(f, "{i} {j} {v:e}").map_err(|e| Error::io(path, e))?;
            }
        }
        Ok(())
    }
}
