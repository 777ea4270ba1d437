use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::basis::{rb_basis_for_element, ElementRbBasis};
use super::compressor::{RbCompressor, DEFAULT_DEPTH, DEFAULT_SNAPSHOTS};
use crate::mesh::PolygonalMesh;
use crate::numerics::{SparseSymMatrix, TripletBuilder};
use crate::vem::{DofMap, ElementProjector};
use crate::Result;

/// Compressors for every polygon size in use, trained lazily and optionally
/// cached as JSON files keyed by `(N, snapshots, depth, seed)`.
#[derive(Debug)]
pub struct RbLibrary {
    pub depth: usize,
    pub n_snapshots: usize,
    pub seed: u64,
    cache_dir: Option<PathBuf>,
    trained: Mutex<BTreeMap<usize, Arc<RbCompressor>>>,
}

impl RbLibrary {
    pub fn new(depth: usize, n_snapshots: usize, seed: u64) -> Self {
        RbLibrary {
            depth,
            n_snapshots,
            seed,
            cache_dir: None,
            trained: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    fn cache_path(&self, n_vertices: usize) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|d| {
            d.join(format!(
                "rb_n{n_vertices}_s{}_r{}_seed{}.json",
                self.n_snapshots, self.depth, self.seed
            ))
        })
    }

    pub fn get(&self, n_vertices: usize) -> Result<Arc<RbCompressor>> {
        if let Some(c) = self.trained.lock().expect("rb library poisoned").get(&n_vertices) {
            return Ok(c.clone());
        }
        let path = self.cache_path(n_vertices);
        let cached = path.as_ref().filter(|p| p.exists()).and_then(|p| RbCompressor::load(p).ok());
        let c = match cached {
            Some(c)
                if c.n_vertices == n_vertices
                    && c.depth == self.depth
                    && c.n_snapshots == self.n_snapshots
                    && c.seed == self.seed =>
            {
                c
            }
            _ => {
                let c = RbCompressor::train(n_vertices, self.n_snapshots, self.depth, self.seed)?;
                if let Some(p) = &path {
                    if let Some(dir) = p.parent() {
                        std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
                    }
                    c.save(p)?;
                }
                c
            }
        };
        let c = Arc::new(c);
        self.trained
            .lock()
            .expect("rb library poisoned")
            .insert(n_vertices, c.clone());
        Ok(c)
    }
}

impl Default for RbLibrary {
    fn default() -> Self {
        RbLibrary::new(DEFAULT_DEPTH, DEFAULT_SNAPSHOTS, 0)
    }
}

/// rb bases for every cell of a mesh, keeping `m` modes.
pub fn build_level_bases(
    mesh: &PolygonalMesh,
    projectors: &[ElementProjector],
    library: &RbLibrary,
    m: usize,
) -> Result<Vec<ElementRbBasis>> {
    let mut sizes: Vec<usize> = mesh.cells().iter().map(Vec::len).filter(|&n| n > 3).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let compressors = sizes
        .into_iter()
        .map(|n| Ok((n, library.get(n)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let k = mesh.cell_polygon(c)?;
            let comp = compressors.get(&k.len()).map(|a| a.as_ref());
            rb_basis_for_element(&k, &projectors[c], comp, m, library.depth).map_err(|e| e.on_cell(c))
        })
        .collect()
}

/// Level mass matrix `∫ e^rb_i e^rb_j` over the DOFs of `dofs`.
pub fn level_mass_matrix(mesh: &PolygonalMesh, bases: &[ElementRbBasis], dofs: &DofMap) -> Result<SparseSymMatrix> {
    let locals: Vec<_> = bases.par_iter().map(ElementRbBasis::local_mass).collect();
    let mut tb = TripletBuilder::new(dofs.num_dofs());
    for (c, ml) in locals.iter().enumerate() {
        let cell = mesh.cell(c);
        for (a, &va) in cell.iter().enumerate() {
            let Some(da) = dofs.vertex_to_dof[va] else { continue };
            for (b, &vb) in cell.iter().enumerate() {
                let Some(db) = dofs.vertex_to_dof[vb] else { continue };
                if db <= da {
                    tb.add_lower(da, db, ml[(a, b)]);
                }
            }
        }
    }
    tb.build()
}
