use super::{orient, polygon_diameter, signed_area, triangulate, BoundingBox, Point, Polygon};
use crate::Result;

/// Keeps the part of the convex polygon `pts` where the affine function `f`
/// is non-positive. Values with `|f| <= tol` count as on the line.
pub fn clip_half_plane(pts: &[Point], f: impl Fn(Point) -> f64, tol: f64) -> Vec<Point> {
    let n = pts.len();
    if n == 0 {
        return Vec::new();
    }
    let vals: Vec<f64> = pts
        .iter()
        .map(|&p| {
            let v = f(p);
            if v.abs() <= tol {
                0.0
            } else {
                v
            }
        })
        .collect();
    if vals.iter().all(|&v| v <= 0.0) {
        return pts.to_vec();
    }
    if vals.iter().all(|&v| v >= 0.0) {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let j = (i + 1) % n;
        let (a, fa) = (pts[i], vals[i]);
        let (b, fb) = (pts[j], vals[j]);
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            out.push(a.lerp(b, fa / (fa - fb)));
        }
    }
    out
}

/// Sutherland–Hodgman clipping of a convex `subject` against a convex
/// counterclockwise `clip`. Returns an empty vector when the overlap has no area.
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let scale = polygon_diameter(subject).max(polygon_diameter(clip));
    let tol = 1e-12 * scale;
    let mut out = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        let a = clip[i];
        let b = clip[(i + 1) % m];
        let len = a.dist(b);
        if len == 0.0 {
            continue;
        }
        out = clip_half_plane(&out, |p| -orient(a, b, p) / len, tol);
        if out.len() < 3 {
            return Vec::new();
        }
    }
    dedup_ring(&mut out, tol);
    if out.len() < 3 || signed_area(&out) <= 0.0 {
        return Vec::new();
    }
    out
}

pub(crate) fn dedup_ring(pts: &mut Vec<Point>, tol: f64) {
    pts.dedup_by(|a, b| a.dist(*b) <= tol);
    while pts.len() > 1 && pts[0].dist(pts[pts.len() - 1]) <= tol {
        pts.pop();
    }
}

/// Overlap of `p` and `q` as a soup of convex fragments.
///
/// Both polygons are triangulated and every pair of triangles is clipped;
/// fragments are not merged back into connected components. Fragments with
/// area below `1e-12 * min(|p|, |q|)` are discarded.
pub fn intersect(p: &Polygon, q: &Polygon) -> Result<Vec<Polygon>> {
    if !p.bounding_box().overlaps(&q.bounding_box(), 0.0) {
        return Ok(Vec::new());
    }
    let tp = triangulate(p)?;
    let tq = triangulate(q)?;
    let min_area = 1e-12 * p.area().min(q.area());
    let mut out = Vec::new();
    for a in &tp {
        let ba = BoundingBox::of(&a.0);
        for b in &tq {
            if !ba.overlaps(&BoundingBox::of(&b.0), 0.0) {
                continue;
            }
            let frag = clip_convex(&a.0, &b.0);
            if frag.len() >= 3 && signed_area(&frag) > min_area {
                out.push(Polygon::from_ccw_unchecked(frag));
            }
        }
    }
    Ok(out)
}

pub fn intersection_area(p: &Polygon, q: &Polygon) -> Result<f64> {
    Ok(intersect(p, q)?.iter().map(Polygon::area).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poly(pts: &[(f64, f64)]) -> Polygon {
        Polygon::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    fn unit_square() -> Polygon {
        poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
    }

    #[test]
    fn self_intersection_is_idempotent() {
        let sq = unit_square();
        let frags = intersect(&sq, &sq).unwrap();
        let a: f64 = frags.iter().map(Polygon::area).sum();
        assert!((a - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shifted_square_overlap() {
        let sq = unit_square();
        let sh = sq.translated(Point::new(0.5, 0.5));
        let frags = intersect(&sq, &sh).unwrap();
        let a: f64 = frags.iter().map(Polygon::area).sum();
        assert!((a - 0.25).abs() < 1e-14);
    }

    #[test]
    fn disjoint_and_touching_give_nothing() {
        let sq = unit_square();
        assert!(intersect(&sq, &sq.translated(Point::new(3.0, 0.0)))
            .unwrap()
            .is_empty());
        assert!(intersect(&sq, &sq.translated(Point::new(1.0, 0.0)))
            .unwrap()
            .is_empty());
    }

    fn heptagon() -> Polygon {
        // non-convex, star-shaped about its centroid
        let r = [0.45, 0.2, 0.42, 0.25, 0.4, 0.18, 0.38];
        let v = (0..7)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / 7.0 + 0.1;
                Point::new(0.5 + r[i] * t.cos(), 0.5 + r[i] * t.sin())
            })
            .collect();
        Polygon::new(v).unwrap()
    }

    fn pentagon() -> Polygon {
        let v = (0..5)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / 5.0 + 0.3;
                Point::new(0.62 + 0.3 * t.cos(), 0.45 + 0.3 * t.sin())
            })
            .collect();
        Polygon::new(v).unwrap()
    }

    #[test]
    fn nonconvex_clip_matches_monte_carlo() {
        let h = heptagon();
        let p = pentagon();
        assert!(!h.is_convex());
        let area = intersection_area(&h, &p).unwrap();
        // jittered (stratified) Monte Carlo over the unit box, 10^6 samples
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let k = 1000;
        let mut hits = 0usize;
        for i in 0..k {
            for j in 0..k {
                let x = (i as f64 + rng.random::<f64>()) / k as f64;
                let y = (j as f64 + rng.random::<f64>()) / k as f64;
                let q = Point::new(x, y);
                if h.contains(q, 0.0) && p.contains(q, 0.0) {
                    hits += 1;
                }
            }
        }
        let mc = hits as f64 / (k * k) as f64;
        assert!((area - mc).abs() < 1e-4, "clip {area} vs mc {mc}");
    }

    #[test]
    fn clipping_is_symmetric_and_contained() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let h = heptagon().translated(Point::new(
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
            ));
            let p = pentagon();
            let a = intersection_area(&h, &p).unwrap();
            let b = intersection_area(&p, &h).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300) + 1e-15);
            for frag in intersect(&h, &p).unwrap() {
                for &v in frag.vertices() {
                    assert!(h.contains(v, 1e-10) && p.contains(v, 1e-10));
                }
            }
        }
    }

    #[test]
    fn half_plane_clip_of_square() {
        let sq = unit_square();
        let out = clip_half_plane(sq.vertices(), |p| p.x - 0.25, 0.0);
        assert!((signed_area(&out) - 0.25).abs() < 1e-15);
    }
}
