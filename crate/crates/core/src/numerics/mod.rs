//! Linear-algebra kernels shared by the discretization and the solvers.

mod cg;
mod cholesky;
mod csr;
mod eigen;
mod sparse;

pub use cg::{cg_solve, CgOutcome};
pub use cholesky::{cholesky_solve, reverse_cuthill_mckee, CholeskyFactor};
pub use csr::SparseMatrix;
pub use eigen::power_iteration;
pub use sparse::{SparseSymMatrix, TripletBuilder};

use crate::Result;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// SPD solver used for mass matrices: sparse Cholesky up to a size threshold,
/// diagonally preconditioned CG beyond it.
#[derive(Debug, Clone)]
pub enum SpdSolver {
    Direct(CholeskyFactor),
    Iterative { matrix: SparseSymMatrix, tol: f64 },
}

/// Above this many unknowns mass solves switch from Cholesky to CG.
pub const DIRECT_SOLVE_LIMIT: usize = 20_000;

impl SpdSolver {
    pub fn new(matrix: &SparseSymMatrix) -> Result<Self> {
        if matrix.dim() <= DIRECT_SOLVE_LIMIT {
            Ok(SpdSolver::Direct(CholeskyFactor::new(matrix)?))
        } else {
            Ok(SpdSolver::Iterative {
                matrix: matrix.clone(),
                tol: 1e-12,
            })
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            SpdSolver::Direct(f) => f.solve(b),
            SpdSolver::Iterative { matrix, tol } => {
                Ok(cg_solve(matrix, b, *tol, 10 * matrix.dim() + 100)?.x)
            }
        }
    }
}
