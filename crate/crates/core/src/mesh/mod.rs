//! Polygonal meshes of the unit square and independent (non-nested) mesh
//! hierarchies.

mod hierarchy;
mod io;
mod validate;
mod voronoi;

pub use hierarchy::{build_hierarchy, build_hierarchy_with, level_seed, MeshHierarchy};
pub use io::{load_mesh, save_mesh, MeshFile, MESH_FORMAT_VERSION};
pub use validate::{validate, ValidationReport, Violation};
pub use voronoi::{generate_polygonal_mesh, DEFAULT_LLOYD_ITERATIONS};

use crate::geometry::{polygon_diameter, BoundingBox, Point, Polygon};
use crate::{Error, Result};

/// Distance below which a vertex counts as lying on the boundary of the unit square.
pub const BOUNDARY_TOL: f64 = 1e-12;

pub fn on_unit_square_boundary(p: Point) -> bool {
    p.x.abs() <= BOUNDARY_TOL
        || (p.x - 1.0).abs() <= BOUNDARY_TOL
        || p.y.abs() <= BOUNDARY_TOL
        || (p.y - 1.0).abs() <= BOUNDARY_TOL
}

/// A polygonal tessellation of the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    boundary: Vec<bool>,
    areas: Vec<f64>,
    centroids: Vec<Point>,
    diameters: Vec<f64>,
}

impl PolygonalMesh {
    /// Builds a mesh, flagging as boundary every vertex that lies on the
    /// boundary of the unit square.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let boundary = vertices.iter().map(|&p| on_unit_square_boundary(p)).collect();
        Self::with_boundary(vertices, cells, boundary)
    }

    /// Builds a mesh with explicit boundary flags. Cell orientation and
    /// shape are not checked here; see [`validate`].
    pub fn with_boundary(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        boundary: Vec<bool>,
    ) -> Result<Self> {
        if boundary.len() != vertices.len() {
            return Err(Error::DimensionMismatch {
                expected: vertices.len(),
                found: boundary.len(),
            });
        }
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(Error::DegenerateGeometry(format!(
                    "cell {c} has {} vertices",
                    cell.len()
                )));
            }
            if let Some(&v) = cell.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::IndexOutOfRange(format!(
                    "cell {c} references vertex {v} but the mesh has {} vertices",
                    vertices.len()
                )));
            }
        }
        let mut m = PolygonalMesh {
            vertices,
            cells,
            boundary,
            areas: Vec::new(),
            centroids: Vec::new(),
            diameters: Vec::new(),
        };
        for c in 0..m.cells.len() {
            let pts = m.cell_points(c);
            m.areas.push(crate::geometry::signed_area(&pts));
            m.centroids.push(crate::geometry::polygon_centroid(&pts));
            m.diameters.push(polygon_diameter(&pts));
        }
        Ok(m)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c]
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Cell `c` as a polygon. Fails if the cell is degenerate or clockwise.
    pub fn cell_polygon(&self, c: usize) -> Result<Polygon> {
        let pts = self.cell_points(c);
        if self.areas[c] <= 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "cell {c} has non-positive signed area {}",
                self.areas[c]
            )));
        }
        Polygon::new(pts).map_err(|e| e.on_cell(c))
    }

    /// Signed area of cell `c`.
    pub fn area(&self, c: usize) -> f64 {
        self.areas[c]
    }

    pub fn centroid(&self, c: usize) -> Point {
        self.centroids[c]
    }

    pub fn diameter(&self, c: usize) -> f64 {
        self.diameters[c]
    }

    pub fn cell_bounding_box(&self, c: usize) -> BoundingBox {
        BoundingBox::of(&self.cell_points(c))
    }

    /// Mesh size: largest cell diameter.
    pub fn h(&self) -> f64 {
        self.diameters.iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Largest number of vertices over all cells.
    pub fn max_cell_vertices(&self) -> usize {
        self.cells.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Axis-aligned Cartesian grid of `nx * ny` squares; handy for tests.
    pub fn cartesian(nx: usize, ny: usize) -> Result<Self> {
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push(Point::new(i as f64 / nx as f64, j as f64 / ny as f64));
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Self::new(vertices, cells)
    }
}
