use serde::{Deserialize, Serialize};

use super::{orient, BoundingBox, Point};
use crate::{Error, Result};

/// Area below which a polygon is rejected as degenerate.
pub const MIN_AREA: f64 = 1e-14;

/// Shoelace signed area; positive for counterclockwise vertex order.
pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        s += pts[i].cross(pts[(i + 1) % n]);
    }
    0.5 * s
}

/// Simple polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates and normalises `vertices` to counterclockwise order.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegenerateGeometry(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        let diam = polygon_diameter(&vertices);
        let n = vertices.len();
        for i in 0..n {
            if vertices[i].dist(vertices[(i + 1) % n]) <= 1e-12 * diam {
                return Err(Error::DegenerateGeometry(format!(
                    "repeated consecutive vertex at index {i}"
                )));
            }
        }
        let a = signed_area(&vertices);
        if a.abs() < MIN_AREA {
            return Err(Error::DegenerateGeometry(format!("polygon area {a:e}")));
        }
        if a < 0.0 {
            vertices.reverse();
        }
        if n > 3 && self_intersects(&vertices) {
            return Err(Error::DegenerateGeometry(
                "polygon is self-intersecting".into(),
            ));
        }
        Ok(Polygon { vertices })
    }

    /// Wraps vertices that are known to be counterclockwise and simple.
    pub(crate) fn from_ccw_unchecked(vertices: Vec<Point>) -> Self {
        debug_assert!(signed_area(&vertices) > 0.0);
        Polygon { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point {
        polygon_centroid(&self.vertices)
    }

    /// Maximum pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        polygon_diameter(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| self.vertices[i].dist(self.vertices[(i + 1) % n]))
            .sum()
    }

    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox::of(&self.vertices)
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        let scale = self.diameter().powi(2);
        (0..n).all(|i| {
            orient(
                self.vertices[i],
                self.vertices[(i + 1) % n],
                self.vertices[(i + 2) % n],
            ) >= -1e-14 * scale
        })
    }

    /// True if every triangle (c, v_i, v_{i+1}) is positively oriented.
    pub fn is_star_shaped_wrt(&self, c: Point) -> bool {
        let n = self.vertices.len();
        let tol = 1e-12 * self.diameter().powi(2);
        (0..n).all(|i| orient(c, self.vertices[i], self.vertices[(i + 1) % n]) > tol)
    }

    /// Point-in-polygon test; points within `tol` of the boundary count as inside.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let (a, b) = self.edge(i);
            if point_segment_distance(p, a, b) <= tol {
                return true;
            }
        }
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (pi, pj) = (self.vertices[i], self.vertices[j]);
            if (pi.y > p.y) != (pj.y > p.y) {
                let x = pj.x + (p.y - pj.y) * (pi.x - pj.x) / (pi.y - pj.y);
                if p.x < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    pub fn scaled(&self, s: f64) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|&p| p * s).collect(),
        }
    }

    pub fn translated(&self, t: Point) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|&p| p + t).collect(),
        }
    }
}

/// Area centroid of a simple polygon given by its vertices.
pub fn polygon_centroid(pts: &[Point]) -> Point {
    let n = pts.len();
    let mut a = 0.0;
    let mut c = Point::default();
    // shift for round-off
    let o = pts[0];
    for i in 0..n {
        let p = pts[i] - o;
        let q = pts[(i + 1) % n] - o;
        let w = p.cross(q);
        a += w;
        c += (p + q) * w;
    }
    o + c * (1.0 / (3.0 * a))
}

/// Maximum pairwise vertex distance.
pub fn polygon_diameter(pts: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(pts[i].dist(pts[j]));
        }
    }
    d
}

pub(crate) fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let l2 = ab.dot(ab);
    if l2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / l2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn self_intersects(v: &[Point]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}
