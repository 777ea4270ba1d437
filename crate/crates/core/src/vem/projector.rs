use nalgebra::{DMatrix, Matrix3};

use crate::geometry::{quadrature_on_polygon, Point, Polygon};
use crate::{Error, Result};

/// Elliptic projection onto linears for one polygon.
///
/// Monomials are `{1, (x - x_c)/h, (y - y_c)/h}` with `x_c` the centroid and
/// `h` the diameter. The constant is fixed by matching boundary integrals,
/// `∫_{∂K} Π v = ∫_{∂K} v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementProjector {
    pub centroid: Point,
    pub diameter: f64,
    pub area: f64,
    /// 3 x N: DOF values to monomial coefficients.
    pub pi_star: DMatrix<f64>,
    /// N x N: DOF values to vertex values of the projected linear.
    pub pi: DMatrix<f64>,
    /// Gradient Gram matrix of the monomials (first row and column zero).
    pub grad_gram: Matrix3<f64>,
    vertices: Vec<Point>,
}

impl ElementProjector {
    pub fn num_dofs(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn monomials(&self, p: Point) -> [f64; 3] {
        [
            1.0,
            (p.x - self.centroid.x) / self.diameter,
            (p.y - self.centroid.y) / self.diameter,
        ]
    }

    /// Value at `p` of the projection of the function with DOFs `dofs`.
    pub fn eval_projection(&self, dofs: &[f64], p: Point) -> f64 {
        let m = self.monomials(p);
        (0..3)
            .map(|a| m[a] * (0..dofs.len()).map(|i| self.pi_star[(a, i)] * dofs[i]).sum::<f64>())
            .sum()
    }

    /// Constant gradient of the projection.
    pub fn projection_gradient(&self, dofs: &[f64]) -> Point {
        let c = |a: usize| (0..dofs.len()).map(|i| self.pi_star[(a, i)] * dofs[i]).sum::<f64>();
        Point::new(c(1) / self.diameter, c(2) / self.diameter)
    }
}

pub fn elliptic_projector(k: &Polygon) -> Result<ElementProjector> {
    let v = k.vertices();
    let n = v.len();
    let c = k.centroid();
    let h = k.diameter();
    let area = k.area();
    if !(area / (h * h) > 1e-14) {
        return Err(Error::SingularProjector { cell: usize::MAX });
    }
    let mono = |p: Point| [1.0, (p.x - c.x) / h, (p.y - c.y) / h];

    let mut b = DMatrix::<f64>::zeros(3, n);
    let mut g = Matrix3::<f64>::zeros();
    for i in 0..n {
        let j = (i + 1) % n;
        let d = v[j] - v[i];
        let len = d.norm();
        // boundary mean row
        b[(0, i)] += 0.5 * len;
        b[(0, j)] += 0.5 * len;
        // ∫_e v ∂_n m_α with outward normal * |e| = (d.y, -d.x); traces are linear
        for (a, nd) in [(1, d.y / h), (2, -d.x / h)] {
            b[(a, i)] += 0.5 * nd;
            b[(a, j)] += 0.5 * nd;
        }
        let (mi, mj) = (mono(v[i]), mono(v[j]));
        for beta in 0..3 {
            g[(0, beta)] += 0.5 * len * (mi[beta] + mj[beta]);
        }
    }
    let s = area / (h * h);
    g[(1, 1)] = s;
    g[(2, 2)] = s;
    let g_inv = g.try_inverse().ok_or(Error::SingularProjector { cell: usize::MAX })?;
    let g_inv = DMatrix::from_iterator(3, 3, g_inv.iter().copied());
    let pi_star = &g_inv * &b;
    let d = DMatrix::from_fn(n, 3, |i, a| mono(v[i])[a]);
    let pi = &d * &pi_star;
    let mut grad_gram = Matrix3::zeros();
    grad_gram[(1, 1)] = s;
    grad_gram[(2, 2)] = s;
    Ok(ElementProjector {
        centroid: c,
        diameter: h,
        area,
        pi_star,
        pi,
        grad_gram,
        vertices: v.to_vec(),
    })
}

/// Consistency term `Π*ᵀ G Π*`.
pub fn consistency_stiffness(p: &ElementProjector) -> DMatrix<f64> {
    let g = DMatrix::from_iterator(3, 3, p.grad_gram.iter().copied());
    p.pi_star.transpose() * g * &p.pi_star
}

/// Consistency plus unit-weight vertex-value stabilization:
/// `Π*ᵀ G Π* + (I - Π)ᵀ (I - Π)`.
pub fn local_stiffness(p: &ElementProjector) -> DMatrix<f64> {
    let n = p.num_dofs();
    let consistency = consistency_stiffness(p);
    let ip = DMatrix::<f64>::identity(n, n) - &p.pi;
    let stab = ip.transpose() * &ip;
    let k = consistency + stab;
    // exact symmetry
    (&k + k.transpose()) * 0.5
}

/// Load vector `(Π⁰₀ f) ∫_K v_i`, with `weights[i]` standing for `∫_K v_i`.
pub fn local_load(k: &Polygon, f: impl Fn(Point) -> f64, weights: &[f64]) -> Result<Vec<f64>> {
    let q = quadrature_on_polygon(k, 2)?;
    let integral: f64 = q.iter().map(|&(p, w)| w * f(p)).sum();
    let mean = integral / k.area();
    Ok(weights.iter().map(|w| mean * w).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vem::vertex_average_weights;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> Polygon {
        Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    fn random_star_polygon(rng: &mut ChaCha8Rng, n: usize) -> Polygon {
        loop {
            let c = Point::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            let v: Vec<Point> = (0..n)
                .map(|i| {
                    let t = (i as f64 + rng.random_range(-0.35..0.35)) * std::f64::consts::TAU
                        / n as f64;
                    let r = rng.random_range(0.3..1.0) * 0.1;
                    c + Point::new(r * t.cos(), r * t.sin())
                })
                .collect();
            if let Ok(p) = Polygon::new(v) {
                if p.is_star_shaped_wrt(p.centroid()) {
                    return p;
                }
            }
        }
    }

    #[test]
    fn reproduces_linears() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 3..10 {
            let k = random_star_polygon(&mut rng, n);
            let p = elliptic_projector(&k).unwrap();
            let (a, b, c) = (0.3, -1.7, 2.2);
            let dofs: Vec<f64> = k.vertices().iter().map(|q| a + b * q.x + c * q.y).collect();
            let out = &p.pi * nalgebra::DVector::from_vec(dofs.clone());
            for i in 0..n {
                assert!((out[i] - dofs[i]).abs() < 1e-12);
            }
            let ones = &p.pi * nalgebra::DVector::from_element(n, 1.0);
            assert!(ones.iter().all(|&v| (v - 1.0).abs() < 1e-12));
            let sq = &p.pi * &p.pi;
            assert!((sq - &p.pi).amax() < 1e-12);
        }
    }

    #[test]
    fn hat_on_unit_square_matches_direct_solve() {
        // oracle: unscaled monomials {1, x, y}; gradient from ∫_{∂K} v n, constant
        // from the boundary mean, written out independently
        let k = unit_square();
        let p = elliptic_projector(&k).unwrap();
        let v = k.vertices();
        let mut grad = [0.0, 0.0];
        let mut bnd_v = 0.0;
        let mut bnd_x = 0.0;
        let mut bnd_y = 0.0;
        let mut perim = 0.0;
        let dofs = [1.0, 0.0, 0.0, 0.0];
        for i in 0..4 {
            let j = (i + 1) % 4;
            let d = v[j] - v[i];
            let len = d.norm();
            let normal = [d.y / len, -d.x / len];
            let mean = 0.5 * (dofs[i] + dofs[j]);
            grad[0] += normal[0] * mean * len;
            grad[1] += normal[1] * mean * len;
            bnd_v += mean * len;
            bnd_x += 0.5 * (v[i].x + v[j].x) * len;
            bnd_y += 0.5 * (v[i].y + v[j].y) * len;
            perim += len;
        }
        let a = (bnd_v - grad[0] * bnd_x - grad[1] * bnd_y) / perim;
        assert_eq!(grad, [-0.5, -0.5]);
        assert!((a - 0.75).abs() < 1e-15);
        for (i, q) in v.iter().enumerate() {
            let expect = a + grad[0] * q.x + grad[1] * q.y;
            assert!((p.pi[(i, 0)] - expect).abs() < 1e-14);
        }
        // monomial coefficients in the scaled basis
        let h = 2f64.sqrt();
        assert!((p.pi_star[(1, 0)] - grad[0] * h).abs() < 1e-14);
        assert!((p.pi_star[(2, 0)] - grad[1] * h).abs() < 1e-14);
        assert!((p.pi_star[(0, 0)] - (a + 0.5 * grad[0] + 0.5 * grad[1])).abs() < 1e-14);
    }

    #[test]
    fn unit_square_stiffness_matches_oracle() {
        // hand-derived: consistency (1/2, 0, -1/2, 0) circulant plus
        // stabilization (-1)^{i+j}/4, i.e. 3/4 on the diagonal and -1/4 elsewhere
        let k = local_stiffness(&elliptic_projector(&unit_square()).unwrap());
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 0.75 } else { -0.25 };
                assert!((k[(i, j)] - e).abs() < 1e-12, "({i},{j}) = {}", k[(i, j)]);
            }
        }
    }

    #[test]
    fn kernel_is_constants_and_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 3..9 {
            let k = random_star_polygon(&mut rng, n);
            let a = local_stiffness(&elliptic_projector(&k).unwrap());
            for i in 0..n {
                assert!(a.row(i).sum().abs() < 1e-12);
            }
            assert!((&a - a.transpose()).amax() < 1e-15);
            let eig = a.clone().symmetric_eigen().eigenvalues;
            let mut e: Vec<f64> = eig.iter().copied().collect();
            e.sort_by(|x, y| x.partial_cmp(y).unwrap());
            assert!(e[0].abs() < 1e-12);
            assert!(e[1] > 1e-6, "second eigenvalue {}", e[1]);
            let a2 = local_stiffness(&elliptic_projector(&k.scaled(2.0)).unwrap());
            assert!((&a2 - &a).amax() < 1e-12);
        }
    }

    #[test]
    fn stabilization_vanishes_on_linears() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = random_star_polygon(&mut rng, 7);
        let p = elliptic_projector(&k).unwrap();
        let n = 7;
        let ip = DMatrix::<f64>::identity(n, n) - &p.pi;
        let dofs = nalgebra::DVector::from_iterator(
            n,
            k.vertices().iter().map(|q| 1.0 - 2.0 * q.x + 0.5 * q.y),
        );
        let w = &ip * &dofs;
        assert!(w.amax() < 1e-12);
    }

    #[test]
    fn load_vectors() {
        let sq = unit_square();
        let w = vertex_average_weights(&sq);
        assert_eq!(local_load(&sq, |_| 0.0, &w).unwrap(), vec![0.0; 4]);
        let l = local_load(&sq, |_| 1.0, &w).unwrap();
        for v in l {
            assert!((v - 0.25).abs() < 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let k = random_star_polygon(&mut rng, 5);
        let ones = vec![k.area(); 5];
        let l = local_load(&k, |p| p.x, &ones).unwrap();
        // Π⁰₀ x = centroid x
        assert!((l[0] / k.area() - k.centroid().x).abs() < 1e-12);
    }

    #[test]
    fn degenerate_polygon_is_singular() {
        // valid polygon but with an extremely thin aspect
        let k = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1e-13),
        ]);
        assert!(k.is_err() || elliptic_projector(&k.unwrap()).is_err());
    }
}
