use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::PolygonalMesh;
use crate::geometry::{clip_half_plane, polygon_centroid, signed_area, Point};
use crate::{Error, Result};

pub const DEFAULT_LLOYD_ITERATIONS: usize = 100;

/// Vertices closer than this are merged when the Voronoi cells are glued.
const MERGE_TOL: f64 = 1e-10;

const MAX_ATTEMPTS: u64 = 5;

/// Lloyd-relaxed Voronoi tessellation of the unit square with `n_cells`
/// cells. Deterministic in `(n_cells, seed, lloyd_iterations)`.
pub fn generate_polygonal_mesh(
    n_cells: usize,
    seed: u64,
    lloyd_iterations: usize,
) -> Result<PolygonalMesh> {
    if n_cells < 4 {
        return Err(Error::GenerationFailure(format!(
            "need at least 4 cells, got {n_cells}"
        )));
    }
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let s = seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        match try_generate(n_cells, s, lloyd_iterations) {
            Ok(m) => return Ok(m),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap())
}

fn try_generate(n: usize, seed: u64, iterations: usize) -> Result<PolygonalMesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds: Vec<Point> = (0..n)
        .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    for _ in 0..iterations {
        let cells = voronoi_cells(&seeds)?;
        seeds = cells.iter().map(|c| polygon_centroid(c)).collect();
    }
    let cells = voronoi_cells(&seeds)?;
    glue(cells)
}

/// Uniform bucket grid over the seeds.
struct SeedGrid {
    g: usize,
    buckets: Vec<Vec<usize>>,
}

impl SeedGrid {
    fn new(seeds: &[Point]) -> Self {
        let g = ((seeds.len() as f64).sqrt().ceil() as usize).max(1);
        let mut buckets = vec![Vec::new(); g * g];
        for (i, &p) in seeds.iter().enumerate() {
            let (bx, by) = Self::bucket_of(g, p);
            buckets[by * g + bx].push(i);
        }
        SeedGrid { g, buckets }
    }

    fn bucket_of(g: usize, p: Point) -> (usize, usize) {
        let f = |v: f64| ((v * g as f64).floor().max(0.0) as usize).min(g - 1);
        (f(p.x), f(p.y))
    }
}

fn voronoi_cells(seeds: &[Point]) -> Result<Vec<Vec<Point>>> {
    let grid = SeedGrid::new(seeds);
    seeds
        .par_iter()
        .enumerate()
        .map(|(i, _)| voronoi_cell(seeds, &grid, i))
        .collect()
}

fn voronoi_cell(seeds: &[Point], grid: &SeedGrid, i: usize) -> Result<Vec<Point>> {
    let p = seeds[i];
    let g = grid.g as isize;
    let cs = 1.0 / grid.g as f64;
    let mut poly = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ];
    let (bx, by) = SeedGrid::bucket_of(grid.g, p);
    let (bx, by) = (bx as isize, by as isize);
    for ring in 0..=g {
        for dy in -ring..=ring {
            for dx in -ring..=ring {
                if dx.abs() != ring && dy.abs() != ring {
                    continue;
                }
                let (x, y) = (bx + dx, by + dy);
                if x < 0 || y < 0 || x >= g || y >= g {
                    continue;
                }
                for &j in &grid.buckets[(y * g + x) as usize] {
                    if j == i {
                        continue;
                    }
                    let q = seeds[j];
                    let d = q - p;
                    let len = d.norm();
                    if len < 1e-14 {
                        return Err(Error::GenerationFailure(format!(
                            "coincident seeds {i} and {j}"
                        )));
                    }
                    let m = (p + q) * 0.5;
                    poly = clip_half_plane(&poly, |x| (x - m).dot(d) / len, 1e-15);
                    if poly.len() < 3 {
                        return Err(Error::GenerationFailure(format!("cell {i} vanished")));
                    }
                }
            }
        }
        let reach = poly.iter().map(|v| v.dist(p)).fold(0.0, f64::max);
        if ring as f64 * cs > 2.0 * reach {
            break;
        }
    }
    if signed_area(&poly) <= 1e-14 {
        return Err(Error::GenerationFailure(format!("cell {i} is degenerate")));
    }
    Ok(poly)
}

fn snap(v: f64) -> f64 {
    if v.abs() <= super::BOUNDARY_TOL {
        0.0
    } else if (v - 1.0).abs() <= super::BOUNDARY_TOL {
        1.0
    } else {
        v
    }
}

/// Merges coincident cell corners into shared vertices.
fn glue(cells: Vec<Vec<Point>>) -> Result<PolygonalMesh> {
    use std::collections::HashMap;
    let key = |p: Point| {
        (
            (p.x / (10.0 * MERGE_TOL)).floor() as i64,
            (p.y / (10.0 * MERGE_TOL)).floor() as i64,
        )
    };
    let mut index: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut out_cells = Vec::with_capacity(cells.len());
    for (c, poly) in cells.iter().enumerate() {
        let mut ids: Vec<usize> = Vec::with_capacity(poly.len());
        for &raw in poly {
            let p = Point::new(snap(raw.x), snap(raw.y));
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = index.get(&(kx + dx, ky + dy)) {
                        for &v in list {
                            if vertices[v].dist(p) <= MERGE_TOL {
                                found = Some(v);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let id = found.unwrap_or_else(|| {
                vertices.push(p);
                index.entry((kx, ky)).or_default().push(vertices.len() - 1);
                vertices.len() - 1
            });
            ids.push(id);
        }
        ids.dedup();
        while ids.len() > 1 && ids[0] == ids[ids.len() - 1] {
            ids.pop();
        }
        if ids.len() < 3 {
            return Err(Error::GenerationFailure(format!(
                "cell {c} collapsed while merging vertices"
            )));
        }
        out_cells.push(ids);
    }
    PolygonalMesh::new(vertices, out_cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate;

    #[test]
    fn four_cells_tile_the_square() {
        let m = generate_polygonal_mesh(4, 17, 200).unwrap();
        assert_eq!(m.num_cells(), 4);
        assert!((m.total_area() - 1.0).abs() < 1e-10);
        assert!(validate(&m).is_valid(), "{:?}", validate(&m));
    }

    #[test]
    fn independent_seeds_give_distinct_meshes() {
        let a = generate_polygonal_mesh(512, 1, 100).unwrap();
        let b = generate_polygonal_mesh(512, 2, 100).unwrap();
        assert_ne!(a.vertices(), b.vertices());
        assert!(validate(&a).is_valid());
        assert!(validate(&b).is_valid());
    }

    #[test]
    fn deterministic() {
        let a = generate_polygonal_mesh(64, 5, 30).unwrap();
        let b = generate_polygonal_mesh(64, 5, 30).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mesh_size_in_quasi_uniform_band() {
        let m = generate_polygonal_mesh(128, 3, 100).unwrap();
        let s = 1.0 / 128f64.sqrt();
        let h = m.h();
        assert!(h >= 0.5 * s && h <= 4.0 * s, "h = {h}, 1/sqrt(n) = {s}");
    }

    #[test]
    fn boundary_vertices_on_the_square() {
        let m = generate_polygonal_mesh(100, 8, 50).unwrap();
        let mut count = 0;
        for (v, p) in m.vertices().iter().enumerate() {
            if m.is_boundary(v) {
                count += 1;
                assert!(p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0);
            }
        }
        assert!(count >= 4);
    }

    #[test]
    fn rejects_too_few_cells() {
        assert!(matches!(
            generate_polygonal_mesh(3, 0, 10),
            Err(Error::GenerationFailure(_))
        ));
    }
}
