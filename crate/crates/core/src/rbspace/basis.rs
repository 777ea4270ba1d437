use nalgebra::{DMatrix, DVector};

use super::compressor::RbCompressor;
use super::harmonic::{fan_lattice, projection_at_nodes, tilde_traces};
use super::lattice::{p1_stiffness, SubTriangulation};
use crate::geometry::{Point, Polygon};
use crate::vem::ElementProjector;
use crate::{Error, Result};

/// Reduced-basis representation of the local VEM basis on one element.
///
/// Nodal values on the fan sub-triangulation of the rb basis functions. For
/// each vertex, `ẽ_i` matches `e_i - Π∇ e_i` on the boundary and is the
/// Galerkin approximation of its harmonic extension in the retained modes
/// (rotated to vertex `i`); the basis function of DOF `j` is
/// `Π∇ e_j + Σ_i (I - Π)_ij ẽ_i`.
#[derive(Debug, Clone)]
pub struct ElementRbBasis {
    pub sub: SubTriangulation,
    /// nodes x N.
    pub values: DMatrix<f64>,
    /// nodes x N, the `Π∇ e_i` part of `values`.
    pub polynomial: DMatrix<f64>,
    pub pi_star: DMatrix<f64>,
    pub centroid: Point,
    pub diameter: f64,
    pub retained: usize,
    pub rank_deficient: bool,
}

/// Build the rb basis of element `k`. Triangles need no compressor: their
/// VEM space is P1 and `ẽ_i = 0`.
pub fn rb_basis_for_element(
    k: &Polygon,
    proj: &ElementProjector,
    compressor: Option<&RbCompressor>,
    m: usize,
    depth: usize,
) -> Result<ElementRbBasis> {
    let nv = k.len();
    let lattice = fan_lattice(nv, depth)?;
    let st = SubTriangulation::new(lattice.clone(), k)?;
    let polynomial = projection_at_nodes(&st, proj);
    let mut raw = DMatrix::<f64>::zeros(lattice.num_nodes(), nv);
    let (mut retained, mut rank_deficient) = (0, false);

    if nv > 3 {
        let c = compressor.ok_or(Error::ShapeMismatch {
            expected: nv,
            found: 0,
        })?;
        if c.n_vertices != nv || c.depth != depth {
            return Err(Error::ShapeMismatch {
                expected: nv,
                found: c.n_vertices,
            });
        }
        let t = c.truncation(m)?;
        (retained, rank_deficient) = (t.retained, t.rank_deficient);
        raw = tilde_traces(&st, proj);
        if retained > 0 {
            let modes = c.modes(retained);
            let int = lattice.interior_nodes();
            let locals: Vec<[[f64; 3]; 3]> = (0..lattice.triangles().len())
                .map(|t| p1_stiffness(&st.triangle(t)))
                .collect();
            for i in 0..nv {
                let back = (nv - i) % nv;
                let vi = DMatrix::from_fn(int.len(), retained, |s, a| {
                    modes[(lattice.slot(lattice.rotated(int[s], back)), a)]
                });
                let mut av = DMatrix::<f64>::zeros(int.len(), retained);
                let mut coupling = DVector::<f64>::zeros(int.len());
                for (ids, ke) in lattice.triangles().iter().zip(&locals) {
                    for a in 0..3 {
                        if lattice.is_boundary(ids[a]) {
                            continue;
                        }
                        let sa = lattice.slot(ids[a]);
                        for b in 0..3 {
                            coupling[sa] += ke[a][b] * raw[(ids[b], i)];
                            if !lattice.is_boundary(ids[b]) {
                                let sb = lattice.slot(ids[b]);
                                for q in 0..retained {
                                    av[(sa, q)] += ke[a][b] * vi[(sb, q)];
                                }
                            }
                        }
                    }
                }
                let ar = vi.transpose() * av;
                let rhs = -(vi.transpose() * coupling);
                let coeffs = ar
                    .cholesky()
                    .ok_or_else(|| Error::SingularLocalSolve("reduced stiffness not positive definite".into()))?
                    .solve(&rhs);
                let correction = &vi * coeffs;
                for (s, &node) in int.iter().enumerate() {
                    raw[(node, i)] += correction[s];
                }
            }
        }
    }
    // v^rb = Π∇v + Σ_i c_i ẽ_i with c = (I - Π) v, so the basis function of
    // DOF j carries the non-polynomial part Σ_i (I - Π)_ij ẽ_i.
    let ip = DMatrix::identity(nv, nv) - &proj.pi;
    let values = &polynomial + raw * ip;

    Ok(ElementRbBasis {
        sub: st,
        values,
        polynomial,
        pi_star: proj.pi_star.clone(),
        centroid: proj.centroid,
        diameter: proj.diameter,
        retained,
        rank_deficient,
    })
}

impl ElementRbBasis {
    pub fn num_dofs(&self) -> usize {
        self.values.ncols()
    }

    /// Nodal values of the non-polynomial parts `e^rb_j - Π∇ e_j`.
    pub fn tilde(&self) -> DMatrix<f64> {
        &self.values - &self.polynomial
    }

    fn locate(&self, p: Point) -> Result<([usize; 3], [f64; 3])> {
        let tol = 1e-10;
        let (fan, l) = self.sub.locate(p, tol).ok_or(Error::PointOutsideElement {
            cell: usize::MAX,
            x: p.x,
            y: p.y,
        })?;
        Ok(self.sub.lattice.sub_triangle(fan, l))
    }

    /// All basis functions `e^rb_i` at `p`.
    pub fn basis_values(&self, p: Point) -> Result<Vec<f64>> {
        let (ids, w) = self.locate(p)?;
        Ok((0..self.num_dofs())
            .map(|i| (0..3).map(|a| w[a] * self.values[(ids[a], i)]).sum())
            .collect())
    }

    /// Evaluate the rb function with DOFs `dofs` at `points`, as the
    /// projection of `dofs` plus the non-polynomial parts weighted by
    /// `(I - Π) dofs`.
    pub fn evaluate(&self, dofs: &[f64], points: &[Point]) -> Result<Vec<f64>> {
        let nv = self.num_dofs();
        if dofs.len() != nv {
            return Err(Error::DimensionMismatch {
                expected: nv,
                found: dofs.len(),
            });
        }
        let coef: Vec<f64> = (0..3)
            .map(|a| (0..nv).map(|i| self.pi_star[(a, i)] * dofs[i]).sum())
            .collect();
        let poly = |p: Point| {
            coef[0] + coef[1] * (p.x - self.centroid.x) / self.diameter + coef[2] * (p.y - self.centroid.y) / self.diameter
        };
        let c: Vec<f64> = (0..nv)
            .map(|k| dofs[k] - poly(self.sub.vertices[k]))
            .collect();
        let tilde = self.tilde();
        points
            .iter()
            .map(|&p| {
                let (ids, w) = self.locate(p)?;
                let nonpoly: f64 = (0..nv)
                    .map(|i| c[i] * (0..3).map(|a| w[a] * tilde[(ids[a], i)]).sum::<f64>())
                    .sum();
                Ok(poly(p) + nonpoly)
            })
            .collect()
    }

    /// `∫_K e^rb_i` for every `i`.
    pub fn integrals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_dofs()];
        for (t, ids) in self.sub.lattice.triangles().iter().enumerate() {
            let w = self.sub.triangle(t).area() / 3.0;
            for (i, o) in out.iter_mut().enumerate() {
                *o += w * ids.iter().map(|&n| self.values[(n, i)]).sum::<f64>();
            }
        }
        out
    }

    /// Sub-triangulation matrix `Xᵀ K_sub X` for nodal coefficient columns `X`.
    pub fn energy_gram(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let nv = x.ncols();
        let mut out = DMatrix::zeros(nv, nv);
        for (t, ids) in self.sub.lattice.triangles().iter().enumerate() {
            let ke = p1_stiffness(&self.sub.triangle(t));
            for a in 0..3 {
                for b in 0..3 {
                    out += ke[a][b] * x.row(ids[a]).transpose() * x.row(ids[b]);
                }
            }
        }
        out
    }

    /// Exact local mass `∫_K e^rb_i e^rb_j`.
    pub fn local_mass(&self) -> DMatrix<f64> {
        let nv = self.num_dofs();
        let mut out = DMatrix::zeros(nv, nv);
        for (t, ids) in self.sub.lattice.triangles().iter().enumerate() {
            let area = self.sub.triangle(t).area();
            for a in 0..3 {
                for b in 0..3 {
                    let w = area / 12.0 * if a == b { 2.0 } else { 1.0 };
                    out += w * self.values.row(ids[a]).transpose() * self.values.row(ids[b]);
                }
            }
        }
        out
    }

    /// Stiffness of the rb functions, `∫_K ∇e^rb_i · ∇e^rb_j`.
    pub fn rb_stiffness(&self) -> DMatrix<f64> {
        self.energy_gram(&self.values)
    }

    /// Stabilization built from the rb non-polynomial parts, `(∇ẽ_i, ∇ẽ_j)_K`.
    pub fn rb_stabilization(&self) -> DMatrix<f64> {
        self.energy_gram(&self.tilde())
    }

    /// Discrete bilinear form evaluated on pairs of rb basis functions: the
    /// projection term computed from vertex values plus the DOF-based
    /// stabilization of their non-polynomial vertex values.
    pub fn consistency_matrix(&self, proj: &ElementProjector) -> DMatrix<f64> {
        let nv = self.num_dofs();
        let lattice = &self.sub.lattice;
        let vertex_vals = DMatrix::from_fn(nv, nv, |k, j| self.values[(lattice.vertex_node(k), j)]);
        let c = (DMatrix::identity(nv, nv) - &proj.pi) * &vertex_vals;
        let ps = &proj.pi_star * &vertex_vals;
        let g = DMatrix::from_fn(3, 3, |a, b| proj.grad_gram[(a, b)]);
        ps.transpose() * g * ps + c.transpose() * c
    }
}
