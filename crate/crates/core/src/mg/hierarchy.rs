use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::smoother::{estimate_lambda, DEFAULT_LAMBDA_TOL};
use crate::geometry::Point;
use crate::mesh::{MeshHierarchy, PolygonalMesh};
use crate::numerics::{CholeskyFactor, SparseSymMatrix};
use crate::rbspace::{build_level_bases, level_mass_matrix, ElementRbBasis, RbLibrary};
use crate::transfer::{cross_mass, RbLevel, Restriction, TransferOperator};
use crate::vem::{
    assemble, assemble_with, consistency_stiffness, local_stiffness, vertex_average_weights, DiscreteSystem,
    LocalMatrices,
};
use crate::{Error, Result};

/// Stabilization of the level bilinear forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stabilization {
    /// Unit-weight products of vertex values of `(I - Π) v`.
    #[default]
    Dofi,
    /// Energy of the rb non-polynomial parts, giving the conforming rb form.
    Rb,
}

/// Closure for `∫_K v_i` in the load vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadRule {
    #[default]
    VertexAverage,
    /// Integrals of the reconstructed rb basis functions.
    RbExact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyOptions {
    /// Number of retained rb modes `M`.
    pub modes: usize,
    pub restriction: Restriction,
    pub stabilization: Stabilization,
    pub load: LoadRule,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        HierarchyOptions {
            modes: 1,
            restriction: Restriction::Algebraic,
            stabilization: Stabilization::Dofi,
            load: LoadRule::VertexAverage,
        }
    }
}

/// One assembled level.
#[derive(Debug)]
pub struct MgLevel {
    pub mesh: PolygonalMesh,
    pub system: DiscreteSystem,
    pub bases: Vec<ElementRbBasis>,
    pub mass: SparseSymMatrix,
}

impl MgLevel {
    pub fn build<F>(mesh: PolygonalMesh, f: F, opts: &HierarchyOptions, library: &RbLibrary) -> Result<Self>
    where
        F: Fn(Point) -> f64 + Sync,
    {
        let standard = assemble(&mesh, &f)?;
        let bases = build_level_bases(&mesh, &standard.projectors, library, opts.modes)?;
        let system = if opts.stabilization == Stabilization::Dofi && opts.load == LoadRule::VertexAverage {
            standard
        } else {
            assemble_with(&mesh, &f, |c, k, p| {
                let stiffness = match opts.stabilization {
                    Stabilization::Dofi => local_stiffness(p),
                    Stabilization::Rb => {
                        let s = bases[c].rb_stabilization();
                        consistency_stiffness(p) + (&s + s.transpose()) * 0.5
                    }
                };
                let load_weights = match opts.load {
                    LoadRule::VertexAverage => vertex_average_weights(k),
                    LoadRule::RbExact => bases[c].integrals(),
                };
                Ok(LocalMatrices {
                    stiffness,
                    load_weights,
                })
            })?
        };
        let mass = level_mass_matrix(&mesh, &bases, &system.dofs)?;
        Ok(MgLevel {
            mesh,
            system,
            bases,
            mass,
        })
    }

    pub fn view(&self) -> RbLevel<'_> {
        RbLevel {
            mesh: &self.mesh,
            bases: &self.bases,
            dofs: &self.system.dofs,
        }
    }

    pub fn num_dofs(&self) -> usize {
        self.system.num_dofs()
    }
}

/// Levels coarse to fine with the transfers between neighbours.
/// `transfers[k]` maps between `levels[k]` and `levels[k + 1]`.
#[derive(Debug)]
pub struct MultigridHierarchy {
    pub levels: Vec<MgLevel>,
    pub transfers: Vec<TransferOperator>,
    pub options: HierarchyOptions,
    lambdas: Mutex<BTreeMap<(usize, u64), f64>>,
    coarse: Vec<OnceLock<CholeskyFactor>>,
}

impl MultigridHierarchy {
    pub fn build<F>(meshes: &MeshHierarchy, f: F, opts: HierarchyOptions, library: &RbLibrary) -> Result<Self>
    where
        F: Fn(Point) -> f64 + Sync,
    {
        let levels = meshes
            .levels
            .iter()
            .map(|m| MgLevel::build(m.clone(), &f, &opts, library))
            .collect::<Result<Vec<_>>>()?;
        Self::from_levels(levels, opts)
    }

    pub fn from_levels(levels: Vec<MgLevel>, opts: HierarchyOptions) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidHierarchy("no levels".into()));
        }
        let transfers = (1..levels.len())
            .map(|k| {
                let b = cross_mass(levels[k - 1].view(), levels[k].view())?;
                TransferOperator::new(
                    (k - 1, k),
                    b,
                    levels[k].mass.clone(),
                    levels[k - 1].mass.clone(),
                    opts.restriction,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let coarse = (0..levels.len()).map(|_| OnceLock::new()).collect();
        Ok(MultigridHierarchy {
            levels,
            transfers,
            options: opts,
            lambdas: Mutex::new(BTreeMap::new()),
            coarse,
        })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> &MgLevel {
        self.levels.last().expect("hierarchy has levels")
    }

    /// Safety-scaled largest stiffness eigenvalue of level `k`, cached per tolerance.
    pub fn lambda(&self, k: usize, tol: f64) -> Result<f64> {
        let key = (k, tol.to_bits());
        if let Some(&l) = self.lambdas.lock().expect("lambda cache poisoned").get(&key) {
            return Ok(l);
        }
        let l = estimate_lambda(&self.levels[k].system.matrix, tol)?;
        self.lambdas.lock().expect("lambda cache poisoned").insert(key, l);
        Ok(l)
    }

    pub fn lambda_default(&self, k: usize) -> Result<f64> {
        self.lambda(k, DEFAULT_LAMBDA_TOL)
    }

    /// Cholesky factor of level `k`, used when `k` is the coarsest level of a run.
    pub fn coarse_factor(&self, k: usize) -> Result<&CholeskyFactor> {
        if let Some(f) = self.coarse[k].get() {
            return Ok(f);
        }
        let f = CholeskyFactor::new(&self.levels[k].system.matrix)?;
        Ok(self.coarse[k].get_or_init(|| f))
    }

}
