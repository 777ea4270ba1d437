use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{on_unit_square_boundary, PolygonalMesh, BOUNDARY_TOL};
use crate::geometry::{orient, BoundingBox, Point};

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Cell has non-positive signed area (clockwise or degenerate).
    Orientation { cell: usize, signed_area: f64 },
    /// Some fan triangle (centroid, v_i, v_{i+1}) is not positively oriented.
    NotStarShaped { cell: usize },
    /// Cell areas do not sum to the area of the unit square.
    AreaSum { total: f64 },
    /// An interior edge is not shared by exactly two cells.
    NonConformingEdge {
        cell: usize,
        edge: (usize, usize),
        count: usize,
    },
    /// A sample point is covered by more than one cell.
    Overlap { point: Point, cells: Vec<usize> },
    /// A sample point is covered by no cell.
    Gap { point: Point },
    /// A vertex flagged as boundary is not on the boundary of the square.
    BoundaryFlag { vertex: usize },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

const OVERLAP_SAMPLES: usize = 2000;

fn on_same_side(a: Point, b: Point) -> bool {
    let t = BOUNDARY_TOL;
    (a.x.abs() <= t && b.x.abs() <= t)
        || ((a.x - 1.0).abs() <= t && (b.x - 1.0).abs() <= t)
        || (a.y.abs() <= t && b.y.abs() <= t)
        || ((a.y - 1.0).abs() <= t && (b.y - 1.0).abs() <= t)
}

/// Checks the mesh invariants and lists every violation found.
pub fn validate(m: &PolygonalMesh) -> ValidationReport {
    let mut violations = Vec::new();
    for c in 0..m.num_cells() {
        let a = m.area(c);
        if a <= 0.0 {
            violations.push(Violation::Orientation {
                cell: c,
                signed_area: a,
            });
            continue;
        }
        let pts = m.cell_points(c);
        let cen = m.centroid(c);
        let tol = 1e-12 * m.diameter(c).powi(2);
        let n = pts.len();
        if (0..n).any(|i| orient(cen, pts[i], pts[(i + 1) % n]) <= tol) {
            violations.push(Violation::NotStarShaped { cell: c });
        }
    }

    let total = m.total_area();
    if (total - 1.0).abs() > 1e-10 {
        violations.push(Violation::AreaSum { total });
    }

    let mut edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for (c, cell) in m.cells().iter().enumerate() {
        for i in 0..cell.len() {
            let (a, b) = (cell[i], cell[(i + 1) % cell.len()]);
            let key = (a.min(b), a.max(b));
            let e = edges.entry(key).or_insert((0, c));
            e.0 += 1;
        }
    }
    let mut bad: Vec<_> = edges
        .iter()
        .filter_map(|(&(a, b), &(count, cell))| {
            let boundary = on_same_side(m.vertices()[a], m.vertices()[b]);
            let expected = if boundary { 1 } else { 2 };
            (count != expected).then_some(Violation::NonConformingEdge {
                cell,
                edge: (a, b),
                count,
            })
        })
        .collect();
    bad.sort_by_key(|v| match v {
        Violation::NonConformingEdge { edge, .. } => *edge,
        _ => unreachable!(),
    });
    violations.extend(bad);

    for (v, &p) in m.vertices().iter().enumerate() {
        if m.is_boundary(v) && !on_unit_square_boundary(p) {
            violations.push(Violation::BoundaryFlag { vertex: v });
        }
    }

    // overlap / gap spot check on random samples
    let boxes: Vec<BoundingBox> = (0..m.num_cells()).map(|c| m.cell_bounding_box(c)).collect();
    let polys: Vec<Option<crate::geometry::Polygon>> =
        (0..m.num_cells()).map(|c| m.cell_polygon(c).ok()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..OVERLAP_SAMPLES {
        let p = Point::new(rng.random::<f64>(), rng.random::<f64>());
        let pb = BoundingBox { min: p, max: p };
        let hits: Vec<usize> = (0..m.num_cells())
            .filter(|&c| boxes[c].overlaps(&pb, 0.0))
            .filter(|&c| polys[c].as_ref().is_some_and(|q| q.contains(p, -1.0)))
            .collect();
        match hits.len() {
            0 => violations.push(Violation::Gap { point: p }),
            1 => {}
            _ => violations.push(Violation::Overlap {
                point: p,
                cells: hits,
            }),
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_polygonal_mesh;

    #[test]
    fn generated_mesh_is_clean() {
        let m = generate_polygonal_mesh(64, 4, 50).unwrap();
        let r = validate(&m);
        assert!(r.is_valid(), "{:?}", r.violations);
    }

    #[test]
    fn cartesian_mesh_is_clean() {
        assert!(validate(&PolygonalMesh::cartesian(3, 2).unwrap()).is_valid());
    }

    #[test]
    fn reversed_cell_is_flagged() {
        let m = generate_polygonal_mesh(16, 4, 20).unwrap();
        let mut cells = m.cells().to_vec();
        cells[5].reverse();
        let bad = PolygonalMesh::new(m.vertices().to_vec(), cells).unwrap();
        let r = validate(&bad);
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Orientation { cell: 5, .. })));
    }

    #[test]
    fn hanging_node_is_flagged() {
        // two unit-height columns; the right one has an extra vertex on the shared edge
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(0.5, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.5, 1.0),
            Point::new(0.0, 1.0),
            Point::new(0.5, 0.5),
        ];
        let cells = vec![vec![0, 1, 4, 5], vec![1, 2, 3, 4, 6]];
        let m = PolygonalMesh::new(v, cells).unwrap();
        let r = validate(&m);
        let flagged: Vec<_> = r
            .violations
            .iter()
            .filter_map(|v| match v {
                Violation::NonConformingEdge { edge, .. } => Some(*edge),
                _ => None,
            })
            .collect();
        assert!(flagged.contains(&(1, 4)));
        assert!(flagged.contains(&(1, 6)) && flagged.contains(&(4, 6)));
    }

    #[test]
    fn missing_cell_leaves_gap() {
        let m = PolygonalMesh::cartesian(2, 2).unwrap();
        let cells = m.cells()[..3].to_vec();
        let holed = PolygonalMesh::new(m.vertices().to_vec(), cells).unwrap();
        let r = validate(&holed);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::AreaSum { .. })));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::Gap { .. })));
    }
}
