use super::{triangulate, Point, Polygon, Triangle};
use crate::{Error, Result};

/// Symmetric rule on the reference triangle; weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleQuadrature {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Highest total polynomial degree integrated exactly.
    pub order: usize,
}

fn perms3(a: f64, b: f64) -> [[f64; 3]; 3] {
    [[a, b, b], [b, a, b], [b, b, a]]
}

fn perms6(a: f64, b: f64, c: f64) -> [[f64; 3]; 6] {
    [
        [a, b, c],
        [a, c, b],
        [b, a, c],
        [b, c, a],
        [c, a, b],
        [c, b, a],
    ]
}

impl TriangleQuadrature {
    pub fn new(order: usize) -> Result<Self> {
        let (points, weights): (Vec<[f64; 3]>, Vec<f64>) = match order {
            1 => (vec![[1.0 / 3.0; 3]], vec![1.0]),
            2 => (perms3(2.0 / 3.0, 1.0 / 6.0).to_vec(), vec![1.0 / 3.0; 3]),
            // Strang–Fix six-point rule, all weights equal
            3 => (
                perms6(0.659027622374092, 0.231933368553031, 0.109039009072877).to_vec(),
                vec![1.0 / 6.0; 6],
            ),
            // Dunavant degree-4 rule
            4 => {
                let mut p = perms3(0.108103018168070, 0.445948490915965).to_vec();
                p.extend(perms3(0.816847572980459, 0.091576213509771));
                let mut w = vec![0.223381589678011; 3];
                w.extend([0.109951743655322; 3]);
                (p, w)
            }
            o => return Err(Error::UnsupportedOrder(o)),
        };
        Ok(TriangleQuadrature {
            points,
            weights,
            order,
        })
    }
}

/// Physical points and weights of `rule` mapped onto `t`.
pub fn quadrature_on_triangle(t: &Triangle, rule: &TriangleQuadrature) -> Vec<(Point, f64)> {
    let a = t.area();
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(&l, &w)| (t.from_barycentric(l), w * a))
        .collect()
}

/// Triangulates `p` and maps a reference rule of the requested order.
pub fn quadrature_on_polygon(p: &Polygon, order: usize) -> Result<Vec<(Point, f64)>> {
    let rule = TriangleQuadrature::new(order)?;
    let mut out = Vec::new();
    for t in triangulate(p)? {
        out.extend(quadrature_on_triangle(&t, &rule));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Gauss–Legendre nodes/weights on [0, 1] by Newton iteration.
    fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            out.push((0.5 * (x + 1.0), 0.5 * w));
        }
        out
    }

    /// Collapsed (Duffy) tensor Gauss rule: exact far beyond any degree used here.
    fn duffy_integrate(t: &Triangle, f: impl Fn(Point) -> f64) -> f64 {
        let gl = gauss_legendre(12);
        let mut s = 0.0;
        for &(u, wu) in &gl {
            for &(v, wv) in &gl {
                let l1 = u;
                let l2 = (1.0 - u) * v;
                let p = t.from_barycentric([1.0 - l1 - l2, l1, l2]);
                s += wu * wv * (1.0 - u) * f(p);
            }
        }
        2.0 * t.area() * s
    }

    fn random_triangle(rng: &mut ChaCha8Rng) -> Triangle {
        loop {
            let p = [0; 3].map(|_| Point::new(rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0)));
            let t = Triangle(p);
            if t.area().abs() > 0.05 {
                return if t.area() > 0.0 { t } else { Triangle([p[0], p[2], p[1]]) };
            }
        }
    }

    #[test]
    fn weights_sum_to_one_and_are_positive() {
        for o in 1..=4 {
            let q = TriangleQuadrature::new(o).unwrap();
            assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(q.weights.iter().all(|&w| w > 0.0));
            for p in &q.points {
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            }
        }
        assert!(matches!(TriangleQuadrature::new(5), Err(Error::UnsupportedOrder(5))));
        assert!(matches!(TriangleQuadrature::new(0), Err(Error::UnsupportedOrder(0))));
    }

    #[test]
    fn rules_are_exact_for_their_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let t = random_triangle(&mut rng);
            for order in 1..=4 {
                let rule = TriangleQuadrature::new(order).unwrap();
                let pts = quadrature_on_triangle(&t, &rule);
                for a in 0..=order {
                    for b in 0..=order - a {
                        let f = |p: Point| p.x.powi(a as i32) * p.y.powi(b as i32);
                        let exact = duffy_integrate(&t, f);
                        let approx: f64 = pts.iter().map(|&(p, w)| w * f(p)).sum();
                        let scale = exact.abs().max(t.area());
                        assert!(
                            (approx - exact).abs() <= 1e-12 * scale,
                            "order {order}, x^{a} y^{b}: {approx} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn polygon_integrals() {
        let sq = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        let q = quadrature_on_polygon(&sq, 2).unwrap();
        let one: f64 = q.iter().map(|&(_, w)| w).sum();
        let x: f64 = q.iter().map(|&(p, w)| w * p.x).sum();
        assert!((one - 1.0).abs() < 1e-14);
        assert!((x - 0.5).abs() < 1e-14);
        assert!(matches!(quadrature_on_polygon(&sq, 7), Err(Error::UnsupportedOrder(7))));
    }

    #[test]
    fn x2y_on_random_convex_pentagon() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let c = Point::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            let v: Vec<Point> = (0..5)
                .map(|i| {
                    let t = (i as f64 + rng.random_range(-0.3..0.3)) * std::f64::consts::TAU / 5.0;
                    let r = rng.random_range(0.5..1.0);
                    c + Point::new(r * t.cos(), r * t.sin())
                })
                .collect();
            let p = Polygon::new(v).unwrap();
            if !p.is_convex() {
                continue;
            }
            let f = |q: Point| q.x * q.x * q.y;
            let approx: f64 = quadrature_on_polygon(&p, 3)
                .unwrap()
                .iter()
                .map(|&(q, w)| w * f(q))
                .sum();
            // reference: very-high-order rule on a fan triangulation
            let reference: f64 = (1..4)
                .map(|i| {
                    let t = Triangle([p.vertices()[0], p.vertices()[i], p.vertices()[i + 1]]);
                    duffy_integrate(&t, f)
                })
                .sum();
            assert!((approx - reference).abs() < 1e-10 * reference.abs().max(1.0));
            let area: f64 = quadrature_on_polygon(&p, 4).unwrap().iter().map(|&(_, w)| w).sum();
            assert!(((area - p.area()) / p.area()).abs() < 1e-12);
        }
    }
}
