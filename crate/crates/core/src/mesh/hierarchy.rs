use rayon::prelude::*;

use super::{generate_polygonal_mesh, PolygonalMesh, DEFAULT_LLOYD_ITERATIONS};
use crate::{Error, Result};

/// Independently generated meshes ordered coarse to fine.
#[derive(Debug, Clone)]
pub struct MeshHierarchy {
    pub levels: Vec<PolygonalMesh>,
    pub h: Vec<f64>,
    /// Measured quasi-uniformity constant `min_j h_j / h_{j-1}` (1 for one level).
    pub c: f64,
}

impl MeshHierarchy {
    /// Wraps existing meshes, checking `h_j <= h_{j-1}`.
    pub fn from_levels(levels: Vec<PolygonalMesh>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidHierarchy("no levels".into()));
        }
        let h: Vec<f64> = levels.iter().map(PolygonalMesh::h).collect();
        let mut c = 1.0f64;
        for j in 1..h.len() {
            if h[j] > h[j - 1] {
                return Err(Error::HierarchyConstraintViolation {
                    coarse: j - 1,
                    fine: j,
                    h_coarse: h[j - 1],
                    h_fine: h[j],
                });
            }
            c = c.min(h[j] / h[j - 1]);
        }
        Ok(MeshHierarchy { levels, h, c })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> &PolygonalMesh {
        self.levels.last().unwrap()
    }

    pub fn cell_counts(&self) -> Vec<usize> {
        self.levels.iter().map(PolygonalMesh::num_cells).collect()
    }
}

/// Seed of level `j` (1-based, coarse to fine) for a hierarchy seed.
pub fn level_seed(seed: u64, j: usize) -> u64 {
    seed.wrapping_mul(31).wrapping_add(j as u64)
}

pub fn build_hierarchy(finest_count: usize, levels: usize, seed: u64) -> Result<MeshHierarchy> {
    build_hierarchy_with(finest_count, levels, seed, DEFAULT_LLOYD_ITERATIONS)
}

/// `levels` meshes with `finest_count / 4^(J-j)` cells each.
pub fn build_hierarchy_with(
    finest_count: usize,
    levels: usize,
    seed: u64,
    lloyd_iterations: usize,
) -> Result<MeshHierarchy> {
    if levels == 0 {
        return Err(Error::InvalidHierarchy("levels must be positive".into()));
    }
    let div = 4usize
        .checked_pow(levels as u32 - 1)
        .ok_or_else(|| Error::InvalidHierarchy("too many levels".into()))?;
    if finest_count % div != 0 {
        return Err(Error::InvalidHierarchy(format!(
            "finest count {finest_count} is not divisible by 4^{}",
            levels - 1
        )));
    }
    let meshes = (1..=levels)
        .into_par_iter()
        .map(|j| {
            let n = finest_count / 4usize.pow((levels - j) as u32);
            generate_polygonal_mesh(n, level_seed(seed, j), lloyd_iterations)
        })
        .collect::<Result<Vec<_>>>()?;
    MeshHierarchy::from_levels(meshes)
}
