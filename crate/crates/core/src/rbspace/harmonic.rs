use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use super::lattice::{p1_stiffness, FanLattice, SubTriangulation};
use crate::geometry::Polygon;
use crate::vem::{elliptic_projector, ElementProjector};
use crate::{Error, Result};

/// Shared lattice for `(N, depth)`.
pub fn fan_lattice(n_vertices: usize, depth: usize) -> Result<Arc<FanLattice>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<FanLattice>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(l) = cache.lock().expect("lattice cache poisoned").get(&(n_vertices, depth)) {
        return Ok(l.clone());
    }
    let l = Arc::new(FanLattice::new(n_vertices, depth)?);
    Ok(cache
        .lock()
        .expect("lattice cache poisoned")
        .entry((n_vertices, depth))
        .or_insert(l)
        .clone())
}

/// Dense P1 stiffness on the sub-triangulation, all nodes.
pub fn dense_stiffness(st: &SubTriangulation) -> DMatrix<f64> {
    let n = st.lattice.num_nodes();
    let mut a = DMatrix::zeros(n, n);
    for (t, ids) in st.lattice.triangles().iter().enumerate() {
        let k = p1_stiffness(&st.triangle(t));
        for i in 0..3 {
            for j in 0..3 {
                a[(ids[i], ids[j])] += k[i][j];
            }
        }
    }
    a
}

/// Interior-interior and interior-boundary blocks of a node matrix.
pub fn split_blocks(lattice: &FanLattice, a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let int = lattice.interior_nodes();
    let bnd = lattice.boundary_nodes();
    let aii = DMatrix::from_fn(int.len(), int.len(), |i, j| a[(int[i], int[j])]);
    let aib = DMatrix::from_fn(int.len(), bnd.len(), |i, j| a[(int[i], bnd[j])]);
    (aii, aib)
}

/// Values of the projected hats `Π∇ e_i` at every lattice node (nodes x N).
pub fn projection_at_nodes(st: &SubTriangulation, proj: &ElementProjector) -> DMatrix<f64> {
    let nv = proj.num_dofs();
    let mut out = DMatrix::zeros(st.nodes.len(), nv);
    for (r, &p) in st.nodes.iter().enumerate() {
        let m = proj.monomials(p);
        for i in 0..nv {
            out[(r, i)] = (0..3).map(|a| m[a] * proj.pi_star[(a, i)]).sum();
        }
    }
    out
}

/// Boundary data of the non-polynomial parts, `e_i - Π∇ e_i`, at the
/// boundary nodes (boundary nodes x N).
pub fn tilde_boundary_data(st: &SubTriangulation, proj: &ElementProjector) -> DMatrix<f64> {
    let lattice = &st.lattice;
    let nv = proj.num_dofs();
    let bnd = lattice.boundary_nodes();
    let mut out = DMatrix::zeros(bnd.len(), nv);
    for (r, &node) in bnd.iter().enumerate() {
        let m = proj.monomials(st.nodes[node]);
        for i in 0..nv {
            out[(r, i)] = -(0..3).map(|a| m[a] * proj.pi_star[(a, i)]).sum::<f64>();
        }
        for (v, w) in lattice.hat_trace(node) {
            out[(r, v)] += w;
        }
    }
    out
}

/// Solve `A_II u = -A_IB g` for every column of `g`.
pub fn harmonic_interior(aii: &DMatrix<f64>, aib: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = aii
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularLocalSolve("interior stiffness block is not positive definite".into()))?;
    Ok(chol.solve(&(-(aib * g))))
}

/// Discrete harmonic extensions of all vertex hats on the refined fan
/// sub-triangulation.
#[derive(Debug, Clone)]
pub struct HarmonicExtension {
    pub sub: SubTriangulation,
    /// Nodal values, nodes x N.
    pub values: DMatrix<f64>,
}

pub fn harmonic_extension_hifi(k: &Polygon, depth: usize) -> Result<HarmonicExtension> {
    let st = SubTriangulation::new(fan_lattice(k.len(), depth)?, k)?;
    let lattice = st.lattice.clone();
    let a = dense_stiffness(&st);
    let (aii, aib) = split_blocks(&lattice, &a);
    let nv = k.len();
    let bnd = lattice.boundary_nodes();
    let mut g = DMatrix::zeros(bnd.len(), nv);
    for (r, &node) in bnd.iter().enumerate() {
        for (v, w) in lattice.hat_trace(node) {
            g[(r, v)] += w;
        }
    }
    let ui = harmonic_interior(&aii, &aib, &g)?;
    let mut values = DMatrix::zeros(lattice.num_nodes(), nv);
    for (r, &node) in bnd.iter().enumerate() {
        values.set_row(node, &g.row(r));
    }
    for (r, &node) in lattice.interior_nodes().iter().enumerate() {
        values.set_row(node, &ui.row(r));
    }
    Ok(HarmonicExtension { sub: st, values })
}

/// Hifi non-polynomial parts `ẽ_i = e_i - Π∇ e_i` at the interior nodes.
pub fn tilde_snapshots(k: &Polygon, depth: usize) -> Result<DMatrix<f64>> {
    let st = SubTriangulation::new(fan_lattice(k.len(), depth)?, k)?;
    let proj = elliptic_projector(k)?;
    let a = dense_stiffness(&st);
    let (aii, aib) = split_blocks(&st.lattice, &a);
    harmonic_interior(&aii, &aib, &tilde_boundary_data(&st, &proj))
}

/// Traces of every `ẽ_i` on the lattice (nodes x N), zero at interior nodes.
pub fn tilde_traces(st: &SubTriangulation, proj: &ElementProjector) -> DMatrix<f64> {
    let g = tilde_boundary_data(st, proj);
    let mut out = DMatrix::zeros(st.lattice.num_nodes(), proj.num_dofs());
    for (r, &node) in st.lattice.boundary_nodes().iter().enumerate() {
        out.set_row(node, &g.row(r));
    }
    out
}

/// Interior parts of every `ẽ_i`, with vertex labels shifted so that
/// column `i` shows vertex `i` as vertex 0.
pub fn aligned_snapshots(k: &Polygon, depth: usize) -> Result<DMatrix<f64>> {
    let st = SubTriangulation::new(fan_lattice(k.len(), depth)?, k)?;
    let proj = elliptic_projector(k)?;
    let a = dense_stiffness(&st);
    let lattice = st.lattice.clone();
    let (aii, aib) = split_blocks(&lattice, &a);
    let raw = harmonic_interior(&aii, &aib, &tilde_boundary_data(&st, &proj))?;
    let int = lattice.interior_nodes();
    Ok(DMatrix::from_fn(int.len(), k.len(), |s, i| {
        raw[(lattice.slot(lattice.rotated(int[s], i)), i)]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn square() -> Polygon {
        Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn square_hat_is_quarter_at_center_by_symmetry() {
        let h = harmonic_extension_hifi(&square(), 3).unwrap();
        for i in 0..4 {
            assert!((h.values[(0, i)] - 0.25).abs() < 1e-12, "{}", h.values[(0, i)]);
        }
    }

    #[test]
    fn extensions_partition_unity_and_reproduce_linears() {
        let k = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.1),
            Point::new(2.3, 1.2),
            Point::new(1.0, 2.0),
            Point::new(-0.3, 0.9),
        ])
        .unwrap();
        let h = harmonic_extension_hifi(&k, 3).unwrap();
        for (r, p) in h.sub.nodes.iter().enumerate() {
            let row = h.values.row(r);
            assert!((row.sum() - 1.0).abs() < 1e-12);
            let x: f64 = (0..5).map(|i| row[i] * k.vertices()[i].x).sum();
            let y: f64 = (0..5).map(|i| row[i] * k.vertices()[i].y).sum();
            assert!((x - p.x).abs() < 1e-12 && (y - p.y).abs() < 1e-12);
        }
    }

    #[test]
    fn aligned_snapshots_of_regular_polygon_coincide() {
        let k = crate::rbspace::regular_polygon(6);
        let s = aligned_snapshots(&k, 2).unwrap();
        for i in 1..6 {
            assert!((s.column(i) - s.column(0)).amax() < 1e-12);
        }
    }

    #[test]
    fn tilde_parts_vanish_on_triangles() {
        let t = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.2), Point::new(0.3, 0.9)]).unwrap();
        let s = tilde_snapshots(&t, 2).unwrap();
        assert!(s.amax() < 1e-13);
    }
}
