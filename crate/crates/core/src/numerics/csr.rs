use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// General rectangular matrix in compressed row storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Duplicates are summed; exact zeros are dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut t: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(i, j, _)) = t.iter().find(|&&(i, j, _)| i >= rows || j >= cols) {
            return Err(Error::IndexOutOfRange(format!("({i}, {j}) in {rows}x{cols} matrix")));
        }
        t.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values = Vec::with_capacity(t.len());
        let mut k = 0;
        for row in 0..rows {
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
        Ok(SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect())
    }

    /// `Aᵀ x`.
    pub fn spmv_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (j, v) in self.row(i) {
                y[j] += v * xi;
            }
        }
        Ok(y)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// One "row col value" line per stored entry.
    pub fn write_triplets(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                writeln!(f, "{i} {j} {v:e}").map_err(|e| Error::io(path, e))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_match_dense() {
        let m = SparseMatrix::from_triplets(
            3,
            2,
            vec![(0, 0, 1.0), (2, 1, -2.0), (0, 0, 0.5), (1, 1, 3.0), (1, 0, 0.0)],
        )
        .unwrap();
        assert_eq!(m.nnz(), 3);
        let d = m.to_dense();
        let x = [1.0, 2.0];
        let y = [0.5, -1.0, 4.0];
        let dx = &d * nalgebra::DVector::from_column_slice(&x);
        let dty = d.transpose() * nalgebra::DVector::from_column_slice(&y);
        assert_eq!(m.spmv(&x).unwrap(), dx.as_slice());
        assert_eq!(m.spmv_transpose(&y).unwrap(), dty.as_slice());
        assert!(m.spmv(&y).is_err());
        assert!(SparseMatrix::from_triplets(1, 1, vec![(0, 1, 1.0)]).is_err());
    }
}
