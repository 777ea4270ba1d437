use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{elliptic_projector, local_load, local_stiffness, ElementProjector};
use crate::geometry::{quadrature_on_polygon, Point, Polygon};
use crate::mesh::PolygonalMesh;
use crate::numerics::{SparseSymMatrix, TripletBuilder};
use crate::{Error, Result};

/// Vertex ↔ free-DOF numbering after Dirichlet elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub vertex_to_dof: Vec<Option<usize>>,
    pub dof_to_vertex: Vec<usize>,
}

impl DofMap {
    /// Interior vertices numbered in ascending vertex order.
    pub fn interior(mesh: &PolygonalMesh) -> Self {
        let mut vertex_to_dof = vec![None; mesh.num_vertices()];
        let mut dof_to_vertex = Vec::new();
        for v in 0..mesh.num_vertices() {
            if !mesh.is_boundary(v) {
                vertex_to_dof[v] = Some(dof_to_vertex.len());
                dof_to_vertex.push(v);
            }
        }
        DofMap {
            vertex_to_dof,
            dof_to_vertex,
        }
    }

    /// Every vertex is a DOF.
    pub fn all(mesh: &PolygonalMesh) -> Self {
        let n = mesh.num_vertices();
        DofMap {
            vertex_to_dof: (0..n).map(Some).collect(),
            dof_to_vertex: (0..n).collect(),
        }
    }

    pub fn num_dofs(&self) -> usize {
        self.dof_to_vertex.len()
    }

    /// Vertex values (zero on the boundary) from a free-DOF vector.
    pub fn expand(&self, u: &[f64]) -> Vec<f64> {
        self.vertex_to_dof
            .iter()
            .map(|d| d.map_or(0.0, |d| u[d]))
            .collect()
    }
}

/// Per-element contribution: stiffness and the weights standing for `∫_K v_i`.
#[derive(Debug, Clone)]
pub struct LocalMatrices {
    pub stiffness: DMatrix<f64>,
    pub load_weights: Vec<f64>,
}

/// Default closure for `∫_K v_i`: `|K| / N` per vertex.
pub fn vertex_average_weights(k: &Polygon) -> Vec<f64> {
    vec![k.area() / k.len() as f64; k.len()]
}

/// Assembled system on one mesh level.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    pub matrix: SparseSymMatrix,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
    pub projectors: Vec<ElementProjector>,
    pub local_stiffness: Vec<DMatrix<f64>>,
}

impl DiscreteSystem {
    pub fn num_dofs(&self) -> usize {
        self.dofs.num_dofs()
    }

    /// Stiffness over all vertices, before boundary elimination.
    pub fn full_stiffness(&self, mesh: &PolygonalMesh) -> Result<SparseSymMatrix> {
        let mut b = TripletBuilder::new(mesh.num_vertices());
        for (c, k) in self.local_stiffness.iter().enumerate() {
            let cell = mesh.cell(c);
            for (a, &va) in cell.iter().enumerate() {
                for (bb, &vb) in cell.iter().enumerate() {
                    b.add_lower(va, vb, k[(a, bb)]);
                }
            }
        }
        b.build()
    }
}

/// Standard VEM assembly with vertex-average load weights.
pub fn assemble<F>(mesh: &PolygonalMesh, f: F) -> Result<DiscreteSystem>
where
    F: Fn(Point) -> f64 + Sync,
{
    assemble_with(mesh, f, |_, k, p| {
        Ok(LocalMatrices {
            stiffness: local_stiffness(p),
            load_weights: vertex_average_weights(k),
        })
    })
}

/// Assembly with caller-provided local matrices. Element work runs in
/// parallel; the scatter is serial in ascending cell order.
pub fn assemble_with<F, L>(mesh: &PolygonalMesh, f: F, local: L) -> Result<DiscreteSystem>
where
    F: Fn(Point) -> f64 + Sync,
    L: Fn(usize, &Polygon, &ElementProjector) -> Result<LocalMatrices> + Sync,
{
    let dofs = DofMap::interior(mesh);
    if dofs.num_dofs() == 0 {
        return Err(Error::DegenerateGeometry("mesh has no interior vertices".into()));
    }
    let per_cell: Vec<(ElementProjector, LocalMatrices, Vec<f64>)> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let run = || -> Result<_> {
                let k = mesh.cell_polygon(c)?;
                let p = elliptic_projector(&k).map_err(|e| match e {
                    Error::SingularProjector { .. } => Error::SingularProjector { cell: c },
                    e => e,
                })?;
                let lm = local(c, &k, &p)?;
                let load = local_load(&k, &f, &lm.load_weights)?;
                Ok((p, lm, load))
            };
            run().map_err(|e| e.on_cell(c))
        })
        .collect::<Result<_>>()?;

    let mut builder = TripletBuilder::new(dofs.num_dofs());
    let mut rhs = vec![0.0; dofs.num_dofs()];
    for (c, (_, lm, load)) in per_cell.iter().enumerate() {
        let cell = mesh.cell(c);
        for (a, &va) in cell.iter().enumerate() {
            let Some(da) = dofs.vertex_to_dof[va] else {
                continue;
            };
            rhs[da] += load[a];
            for (b, &vb) in cell.iter().enumerate() {
                if let Some(db) = dofs.vertex_to_dof[vb] {
                    builder.add_lower(da, db, lm.stiffness[(a, b)]);
                }
            }
        }
    }
    let matrix = builder.build()?;
    let (projectors, local_stiffness) = per_cell
        .into_iter()
        .map(|(p, lm, _)| (p, lm.stiffness))
        .unzip();
    Ok(DiscreteSystem {
        matrix,
        rhs,
        dofs,
        projectors,
        local_stiffness,
    })
}

/// Broken H¹-seminorm error `(Σ_K ‖∇u - ∇Π u_h‖²_K)^{1/2}` of a free-DOF solution.
pub fn energy_error<G>(
    mesh: &PolygonalMesh,
    system: &DiscreteSystem,
    u: &[f64],
    grad_exact: G,
) -> Result<f64>
where
    G: Fn(Point) -> Point,
{
    let values = system.dofs.expand(u);
    let mut err = 0.0;
    for c in 0..mesh.num_cells() {
        let k = mesh.cell_polygon(c)?;
        let local: Vec<f64> = mesh.cell(c).iter().map(|&v| values[v]).collect();
        let g = system.projectors[c].projection_gradient(&local);
        for (p, w) in quadrature_on_polygon(&k, 4)? {
            let d = grad_exact(p) - g;
            err += w * d.dot(d);
        }
    }
    Ok(err.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_polygonal_mesh;
    use crate::numerics::{cholesky_solve, CholeskyFactor};
    use std::f64::consts::PI;

    #[test]
    fn dimension_is_interior_vertex_count() {
        let m = generate_polygonal_mesh(8, 1, 100).unwrap();
        let s = assemble(&m, |_| 1.0).unwrap();
        let interior = (0..m.num_vertices()).filter(|&v| !m.is_boundary(v)).count();
        assert_eq!(s.num_dofs(), interior);
        assert_eq!(s.matrix.dim(), interior);
        assert!(CholeskyFactor::new(&s.matrix).is_ok());
    }

    #[test]
    fn full_stiffness_annihilates_constants() {
        let m = generate_polygonal_mesh(64, 2, 30).unwrap();
        let s = assemble(&m, |_| 1.0).unwrap();
        let full = s.full_stiffness(&m).unwrap();
        let y = full.spmv(&vec![1.0; m.num_vertices()]).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn assembly_is_bit_reproducible_across_thread_counts() {
        let m = generate_polygonal_mesh(128, 3, 20).unwrap();
        let a = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| assemble(&m, |p| p.x * p.y).unwrap());
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| assemble(&m, |p| p.x * p.y).unwrap());
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.rhs, b.rhs);
    }

    #[test]
    fn patch_test_reproduces_linears() {
        // all vertices Dirichlet except interior ones, data from a global linear
        let m = generate_polygonal_mesh(64, 5, 50).unwrap();
        let s = assemble(&m, |_| 0.0).unwrap();
        let full = s.full_stiffness(&m).unwrap();
        let lin = |p: Point| 0.4 - 1.3 * p.x + 2.1 * p.y;
        let g: Vec<f64> = m
            .vertices()
            .iter()
            .enumerate()
            .map(|(v, &p)| if m.is_boundary(v) { lin(p) } else { 0.0 })
            .collect();
        let ag = full.spmv(&g).unwrap();
        let rhs: Vec<f64> = s.dofs.dof_to_vertex.iter().map(|&v| -ag[v]).collect();
        let u = cholesky_solve(&s.matrix, &rhs).unwrap();
        for (d, &v) in s.dofs.dof_to_vertex.iter().enumerate() {
            assert!((u[d] - lin(m.vertices()[v])).abs() < 1e-10);
        }
    }

    #[test]
    fn manufactured_solution_converges_at_first_order() {
        let f = |p: Point| 2.0 * PI * PI * (PI * p.x).sin() * (PI * p.y).sin();
        let grad = |p: Point| {
            Point::new(
                PI * (PI * p.x).cos() * (PI * p.y).sin(),
                PI * (PI * p.x).sin() * (PI * p.y).cos(),
            )
        };
        let mut pts = Vec::new();
        for n in [128, 512, 2048] {
            let m = generate_polygonal_mesh(n, 10, 100).unwrap();
            let s = assemble(&m, f).unwrap();
            let u = cholesky_solve(&s.matrix, &s.rhs).unwrap();
            let e = energy_error(&m, &s, &u, grad).unwrap();
            pts.push((m.h().ln(), e.ln()));
        }
        let rate = least_squares_slope(&pts);
        assert!((0.85..=1.3).contains(&rate), "rate {rate}");
    }

    fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }
}
