use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::harmonic::{aligned_snapshots, dense_stiffness, fan_lattice, split_blocks};
use super::lattice::SubTriangulation;
use crate::geometry::{Point, Polygon};
use crate::{Error, Result};

pub const RB_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_DEPTH: usize = 3;
pub const DEFAULT_SNAPSHOTS: usize = 20;

/// Singular values below this fraction of the largest count as zero. The
/// reference scale is never below the root of the snapshot count, since each
/// snapshot has energy of order one on a unit-diameter polygon.
const RANK_TOL: f64 = 1e-10;

/// Offline POD compressor for the non-polynomial parts of the VEM basis on
/// N-gons. Modes are stored as interior nodal vectors on the fan lattice,
/// orthonormal in the energy inner product of the regular N-gon, and sorted
/// by decreasing singular value.
///
/// Snapshots are aligned: `ẽ_i` is recorded with vertex `i` relabelled as
/// vertex 0, and the online solve for `ẽ_i` uses the modes rotated back.
/// Without alignment the cyclic symmetry of the training family splits the
/// leading singular values into near-degenerate groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbCompressor {
    pub format_version: u32,
    pub n_vertices: usize,
    pub depth: usize,
    pub n_snapshots: usize,
    pub seed: u64,
    pub singular_values: Vec<f64>,
    modes: Vec<Vec<f64>>,
}

/// How many modes a requested truncation actually keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub retained: usize,
    pub rank_deficient: bool,
}

/// Centroid at the origin, unit diameter.
pub fn normalize(k: &Polygon) -> Polygon {
    let c = k.centroid();
    k.translated(-c).scaled(1.0 / k.diameter())
}

pub fn regular_polygon(n: usize) -> Polygon {
    let v = (0..n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            Point::new(t.cos(), t.sin())
        })
        .collect();
    normalize(&Polygon::new(v).expect("regular polygon is valid"))
}

/// Training polygons: regular N-gons with each vertex moved uniformly within a
/// disk of a quarter circumradius, kept only if star-shaped about the centroid.
pub fn training_polygons(n_vertices: usize, count: usize, seed: u64) -> Vec<Polygon> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n_vertices as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<Point> = (0..n_vertices)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n_vertices as f64;
                let r = 0.25 * rng.random::<f64>().sqrt();
                let a = std::f64::consts::TAU * rng.random::<f64>();
                Point::new(t.cos() + r * a.cos(), t.sin() + r * a.sin())
            })
            .collect();
        if let Ok(k) = Polygon::new(v) {
            if k.is_star_shaped_wrt(k.centroid()) {
                out.push(normalize(&k));
            }
        }
    }
    out
}

impl RbCompressor {
    pub fn train(n_vertices: usize, n_snapshots: usize, depth: usize, seed: u64) -> Result<Self> {
        if n_snapshots == 0 {
            return Err(Error::InsufficientSnapshots { snapshots: 0, modes: 1 });
        }
        let lattice = fan_lattice(n_vertices, depth)?;
        let blocks = training_polygons(n_vertices, n_snapshots, seed)
            .par_iter()
            .map(|k| aligned_snapshots(k, depth))
            .collect::<Result<Vec<_>>>()?;
        let ni = lattice.interior_nodes().len();
        let mut s = DMatrix::zeros(ni, n_vertices * n_snapshots);
        for (b, block) in blocks.iter().enumerate() {
            s.columns_mut(b * n_vertices, n_vertices).copy_from(block);
        }

        let reference = SubTriangulation::new(lattice.clone(), &regular_polygon(n_vertices))?;
        let (aii, _) = split_blocks(&lattice, &dense_stiffness(&reference));
        let l = aii
            .cholesky()
            .ok_or_else(|| Error::SingularLocalSolve("reference stiffness not positive definite".into()))?
            .l();
        let x = l.transpose() * &s;
        let svd = x.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let smax = order
            .first()
            .map_or(0.0, |&i| svd.singular_values[i])
            .max((s.ncols() as f64).sqrt());
        let lt = l.transpose();
        let mut singular_values = Vec::new();
        let mut modes = Vec::new();
        for &k in &order {
            let sigma = svd.singular_values[k];
            if !(sigma > RANK_TOL * smax) {
                break;
            }
            let phi = lt
                .solve_upper_triangular(&u.column(k).into_owned())
                .ok_or_else(|| Error::SingularLocalSolve("triangular solve failed".into()))?;
            singular_values.push(sigma);
            modes.push(phi.as_slice().to_vec());
        }
        Ok(RbCompressor {
            format_version: RB_FORMAT_VERSION,
            n_vertices,
            depth,
            n_snapshots,
            seed,
            singular_values,
            modes,
        })
    }

    /// Number of modes with nonzero singular value.
    pub fn rank(&self) -> usize {
        self.modes.len()
    }

    pub fn num_interior_nodes(&self) -> usize {
        fan_lattice(self.n_vertices, self.depth)
            .map(|l| l.interior_nodes().len())
            .unwrap_or(0)
    }

    pub fn truncation(&self, m: usize) -> Result<Truncation> {
        if m > self.n_snapshots * self.n_vertices {
            return Err(Error::InsufficientSnapshots {
                snapshots: self.n_snapshots,
                modes: m,
            });
        }
        let retained = m.min(self.rank());
        Ok(Truncation {
            retained,
            rank_deficient: retained < m,
        })
    }

    /// First `m` modes (or all, if fewer exist) as columns.
    pub fn modes(&self, m: usize) -> DMatrix<f64> {
        let k = m.min(self.rank());
        let ni = self.modes.first().map_or(0, Vec::len);
        DMatrix::from_fn(ni, k, |i, j| self.modes[j][i])
    }

    /// Fraction of snapshot energy captured by the first `m` modes.
    pub fn energy_fraction(&self, m: usize) -> f64 {
        let total: f64 = self.singular_values.iter().map(|s| s * s).sum();
        if total == 0.0 {
            return 1.0;
        }
        self.singular_values.iter().take(m).map(|s| s * s).sum::<f64>() / total
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| crate::Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
        let c: RbCompressor = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        if c.format_version != RB_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                expected: RB_FORMAT_VERSION,
                found: c.format_version,
            });
        }
        Ok(c)
    }
}
