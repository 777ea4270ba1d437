use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::numerics::{SparseMatrix, SparseSymMatrix, SpdSolver};
use crate::{Error, Result};

/// How fine-level residuals are moved to the coarse level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Restriction {
    /// Transpose of the prolongation acting on dual vectors, `Bᵀ M_j⁻¹ r`.
    #[default]
    Algebraic,
    /// L2 projection of the fine Riesz representative, `M_{j-1}⁻¹ Bᵀ M_j⁻¹ r`.
    #[serde(rename = "l2proj")]
    L2Projection,
}

impl FromStr for Restriction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebraic" => Ok(Restriction::Algebraic),
            "l2proj" => Ok(Restriction::L2Projection),
            other => Err(Error::Config(format!(
                "unknown restriction mode '{other}' (expected algebraic or l2proj)"
            ))),
        }
    }
}

impl std::fmt::Display for Restriction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Restriction::Algebraic => "algebraic",
            Restriction::L2Projection => "l2proj",
        })
    }
}

/// L2 transfer between consecutive levels `j - 1` (coarse) and `j` (fine).
#[derive(Debug, Clone)]
pub struct TransferOperator {
    pub levels: (usize, usize),
    pub cross: SparseMatrix,
    pub mode: Restriction,
    fine_mass: SparseSymMatrix,
    coarse_mass: SparseSymMatrix,
    fine_solver: SpdSolver,
    coarse_solver: std::sync::OnceLock<SpdSolver>,
}

fn solver(m: &SparseSymMatrix, what: &str) -> Result<SpdSolver> {
    SpdSolver::new(m).map_err(|e| Error::SolverFailure(format!("{what} mass matrix: {e}")))
}

impl TransferOperator {
    pub fn new(
        levels: (usize, usize),
        cross: SparseMatrix,
        fine_mass: SparseSymMatrix,
        coarse_mass: SparseSymMatrix,
        mode: Restriction,
    ) -> Result<Self> {
        if cross.rows() != fine_mass.dim() || cross.cols() != coarse_mass.dim() {
            return Err(Error::DimensionMismatch {
                expected: fine_mass.dim() * coarse_mass.dim(),
                found: cross.rows() * cross.cols(),
            });
        }
        let fine_solver = solver(&fine_mass, "fine")?;
        let coarse_solver = std::sync::OnceLock::new();
        if mode == Restriction::L2Projection {
            let _ = coarse_solver.set(solver(&coarse_mass, "coarse")?);
        }
        Ok(TransferOperator {
            levels,
            cross,
            mode,
            fine_mass,
            coarse_mass,
            fine_solver,
            coarse_solver,
        })
    }

    pub fn fine_mass(&self) -> &SparseSymMatrix {
        &self.fine_mass
    }

    pub fn coarse_mass(&self) -> &SparseSymMatrix {
        &self.coarse_mass
    }

    /// Fine coefficients of the L2 projection of a coarse function: `M_j x = B v`.
    pub fn prolong(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.fine_solver.solve(&self.cross.spmv(v)?)
    }

    fn coarse_solver(&self) -> Result<&SpdSolver> {
        if let Some(s) = self.coarse_solver.get() {
            return Ok(s);
        }
        let s = solver(&self.coarse_mass, "coarse")?;
        Ok(self.coarse_solver.get_or_init(|| s))
    }

    /// Restriction of a fine residual according to `mode`.
    pub fn restrict_residual(&self, r: &[f64]) -> Result<Vec<f64>> {
        self.restrict_residual_as(self.mode, r)
    }

    pub fn restrict_residual_as(&self, mode: Restriction, r: &[f64]) -> Result<Vec<f64>> {
        let y = self.cross.spmv_transpose(&self.fine_solver.solve(r)?)?;
        match mode {
            Restriction::Algebraic => Ok(y),
            Restriction::L2Projection => self.coarse_solver()?.solve(&y),
        }
    }

    /// Restricted residual as a coarse dual vector, the right-hand side for the
    /// coarse correction. In L2 mode the projected function is tested against
    /// the coarse basis.
    pub fn restrict_to_dual(&self, r: &[f64]) -> Result<Vec<f64>> {
        self.restrict_to_dual_as(self.mode, r)
    }

    pub fn restrict_to_dual_as(&self, mode: Restriction, r: &[f64]) -> Result<Vec<f64>> {
        let y = self.restrict_residual_as(mode, r)?;
        match mode {
            Restriction::Algebraic => Ok(y),
            Restriction::L2Projection => self.coarse_mass.spmv(&y),
        }
    }

    /// Writes `B`, `M_j` and `M_{j-1}` as triplet files into `dir`.
    pub fn dump(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let (c, f) = self.levels;
        self.cross.write_triplets(&dir.join(format!("cross_{c}_{f}.txt")))?;
        self.fine_mass.write_triplets(&dir.join(format!("mass_{f}.txt")))?;
        self.coarse_mass.write_triplets(&dir.join(format!("mass_{c}.txt")))
    }
}
