use super::{orient, Point, Polygon};
use crate::{Error, Result};

/// Counterclockwise triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle(pub [Point; 3]);

impl Triangle {
    pub fn area(&self) -> f64 {
        0.5 * orient(self.0[0], self.0[1], self.0[2])
    }

    pub fn centroid(&self) -> Point {
        (self.0[0] + self.0[1] + self.0[2]) * (1.0 / 3.0)
    }

    /// Barycentric coordinates of `p`.
    pub fn barycentric(&self, p: Point) -> [f64; 3] {
        let [a, b, c] = self.0;
        let det = orient(a, b, c);
        let l1 = orient(p, b, c) / det;
        let l2 = orient(a, p, c) / det;
        [l1, l2, 1.0 - l1 - l2]
    }

    pub fn from_barycentric(&self, l: [f64; 3]) -> Point {
        let [a, b, c] = self.0;
        Point::new(
            l[0] * a.x + l[1] * b.x + l[2] * c.x,
            l[0] * a.y + l[1] * b.y + l[2] * c.y,
        )
    }
}

/// Partitions `p` into triangles.
///
/// Convex polygons are fanned from their first vertex, polygons that are
/// star-shaped with respect to their centroid are fanned from the centroid,
/// and anything else goes through ear clipping.
pub fn triangulate(p: &Polygon) -> Result<Vec<Triangle>> {
    let v = p.vertices();
    if v.len() == 3 {
        return Ok(vec![Triangle([v[0], v[1], v[2]])]);
    }
    if p.is_convex() {
        return Ok((1..v.len() - 1)
            .map(|i| Triangle([v[0], v[i], v[i + 1]]))
            .filter(|t| t.area() > 0.0)
            .collect());
    }
    let c = p.centroid();
    if p.is_star_shaped_wrt(c) {
        let n = v.len();
        return Ok((0..n).map(|i| Triangle([c, v[i], v[(i + 1) % n]])).collect());
    }
    ear_clip(v)
}

/// Ear clipping for a simple counterclockwise polygon.
pub fn ear_clip(v: &[Point]) -> Result<Vec<Triangle>> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let mut out = Vec::with_capacity(v.len().saturating_sub(2));
    let scale = super::polygon_diameter(v).powi(2);
    let eps = 1e-14 * scale;
    while idx.len() > 3 {
        let n = idx.len();
        let mut clipped = false;
        for k in 0..n {
            let (ia, ib, ic) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            let (a, b, c) = (v[ia], v[ib], v[ic]);
            if orient(a, b, c) <= eps {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                if j == ia || j == ib || j == ic {
                    return false;
                }
                let p = v[j];
                orient(a, b, p) >= -eps && orient(b, c, p) >= -eps && orient(c, a, p) >= -eps
            });
            if blocked {
                continue;
            }
            out.push(Triangle([a, b, c]));
            idx.remove(k);
            clipped = true;
            break;
        }
        if !clipped {
            return Err(Error::TriangulationFailure(format!(
                "no ear found with {} vertices remaining",
                idx.len()
            )));
        }
    }
    let t = Triangle([v[idx[0]], v[idx[1]], v[idx[2]]]);
    if t.area() > 0.0 {
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::signed_area;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(p: &[(f64, f64)]) -> Vec<Point> {
        p.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn convex_quad_gives_two_triangles() {
        let q = Polygon::new(pts(&[(0.0, 0.0), (2.0, 0.0), (2.5, 1.0), (0.0, 1.5)])).unwrap();
        let t = triangulate(&q).unwrap();
        assert_eq!(t.len(), 2);
        let s: f64 = t.iter().map(Triangle::area).sum();
        assert!((s - q.area()).abs() < 1e-15);
    }

    #[test]
    fn triangle_is_identity() {
        let p = Polygon::new(pts(&[(0.0, 0.0), (1.0, 0.0), (0.3, 0.7)])).unwrap();
        let t = triangulate(&p).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].0.to_vec(), p.vertices().to_vec());
    }

    /// Random simple non-convex polygon: star around the origin with radii in
    /// [0.2, 1] at sorted angles; every other vertex pulled in hard.
    fn random_star(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
        let mut angles: Vec<f64> = (0..n)
            .map(|i| (i as f64 + rng.random_range(0.1..0.9)) * std::f64::consts::TAU / n as f64)
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        angles
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let r = if i % 2 == 0 {
                    rng.random_range(0.8..1.0)
                } else {
                    rng.random_range(0.05..0.3)
                };
                Point::new(r * a.cos() + 3.0, r * a.sin() - 1.0)
            })
            .collect()
    }

    #[test]
    fn random_nonconvex_octagons_partition_area() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let v = random_star(&mut rng, 8);
            let shoelace = signed_area(&v);
            let p = Polygon::new(v).unwrap();
            let t = triangulate(&p).unwrap();
            let s: f64 = t.iter().map(Triangle::area).sum();
            assert!(((s - shoelace) / shoelace).abs() < 1e-12);
            assert!(t.iter().all(|t| t.area() > 0.0));
            // ear clipping alone must agree as well
            let e = ear_clip(p.vertices()).unwrap();
            assert_eq!(e.len(), 6);
            let s: f64 = e.iter().map(Triangle::area).sum();
            assert!(((s - shoelace) / shoelace).abs() < 1e-12);
        }
    }

    #[test]
    fn barycentric_round_trip() {
        let t = Triangle([Point::new(0.1, 0.2), Point::new(1.3, 0.1), Point::new(0.4, 0.9)]);
        let p = Point::new(0.5, 0.4);
        let l = t.barycentric(p);
        assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(t.from_barycentric(l).dist(p) < 1e-15);
    }
}
