use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PolygonalMesh;
use crate::geometry::Point;
use crate::{Error, Result};

pub const MESH_FORMAT_VERSION: u32 = 1;

/// On-disk JSON layout of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub format_version: u32,
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Vec<usize>>,
    pub boundary_vertices: Vec<usize>,
}

impl From<&PolygonalMesh> for MeshFile {
    fn from(m: &PolygonalMesh) -> Self {
        MeshFile {
            format_version: MESH_FORMAT_VERSION,
            vertices: m.vertices().iter().map(|&p| p.into()).collect(),
            cells: m.cells().to_vec(),
            boundary_vertices: (0..m.num_vertices()).filter(|&v| m.is_boundary(v)).collect(),
        }
    }
}

impl TryFrom<MeshFile> for PolygonalMesh {
    type Error = Error;

    fn try_from(f: MeshFile) -> Result<Self> {
        if f.format_version != MESH_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                expected: MESH_FORMAT_VERSION,
                found: f.format_version,
            });
        }
        let n = f.vertices.len();
        let mut boundary = vec![false; n];
        for &b in &f.boundary_vertices {
            if b >= n {
                return Err(Error::IndexOutOfRange(format!(
                    "boundary vertex {b} but the mesh has {n} vertices"
                )));
            }
            boundary[b] = true;
        }
        let vertices = f.vertices.into_iter().map(Point::from).collect();
        PolygonalMesh::with_boundary(vertices, f.cells, boundary)
    }
}

pub fn save_mesh(m: &PolygonalMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(&MeshFile::from(m)).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolygonalMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: MeshFile = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    file.try_into()
}
