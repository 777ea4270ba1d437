use nalgebra::DMatrix;
use rayon::prelude::*;

use super::broad::candidate_pairs;
use crate::geometry::{clip_convex, clip_half_plane, orient, polygon_centroid, signed_area, Point, Triangle};
use crate::mesh::PolygonalMesh;
use crate::numerics::SparseMatrix;
use crate::rbspace::ElementRbBasis;
use crate::vem::DofMap;
use crate::{Error, Result};

/// One level of the hierarchy as seen by the transfer operators.
#[derive(Debug, Clone, Copy)]
pub struct RbLevel<'a> {
    pub mesh: &'a PolygonalMesh,
    pub bases: &'a [ElementRbBasis],
    pub dofs: &'a DofMap,
}

/// Cut tolerance in lattice units.
const CUT_TOL: f64 = 1e-11;

/// `n λ_k(p)` for the barycentric coordinates of a triangle.
#[derive(Debug, Clone, Copy)]
struct LatticeCoords {
    p: [Point; 3],
    scale: f64,
}

impl LatticeCoords {
    fn new(t: &Triangle, n: usize) -> Self {
        LatticeCoords {
            p: t.0,
            scale: n as f64 / orient(t.0[0], t.0[1], t.0[2]),
        }
    }

    fn eval(&self, k: usize, q: Point) -> f64 {
        let [p0, p1, p2] = self.p;
        self.scale
            * match k {
                0 => orient(q, p1, p2),
                1 => orient(p0, q, p2),
                _ => orient(p0, p1, q),
            }
    }
}

/// Cut a convex polygon along the level lines `s = m` for integer `m`.
fn slice(pieces: Vec<Vec<Point>>, s: impl Fn(Point) -> f64) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    for poly in pieces {
        let (lo, hi) = poly
            .iter()
            .map(|&p| s(p))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let first = (lo + CUT_TOL).ceil() as i64;
        let last = (hi - CUT_TOL).floor() as i64;
        let mut rest = poly;
        for m in first..=last {
            let mf = m as f64;
            let below = clip_half_plane(&rest, |p| s(p) - mf, CUT_TOL);
            rest = clip_half_plane(&rest, |p| mf - s(p), CUT_TOL);
            if below.len() >= 3 {
                out.push(below);
            }
        }
        if rest.len() >= 3 {
            out.push(rest);
        }
    }
    out
}

/// Order-2 rule on a convex polygon, fanned from its first vertex. Exact for
/// the quadratic integrands arising here.
fn convex_quadrature(poly: &[Point]) -> Vec<(Point, f64)> {
    const A: f64 = 2.0 / 3.0;
    const B: f64 = 1.0 / 6.0;
    let mut out = Vec::with_capacity(3 * (poly.len() - 2));
    for i in 1..poly.len() - 1 {
        let t = Triangle([poly[0], poly[i], poly[i + 1]]);
        let w = t.area() / 3.0;
        if w <= 0.0 {
            continue;
        }
        for l in [[A, B, B], [B, A, B], [B, B, A]] {
            out.push((t.from_barycentric(l), w));
        }
    }
    out
}

fn sub_triangle_values(basis: &ElementRbBasis, fan: usize, c: Point) -> ([usize; 3], Triangle) {
    let l = basis.sub.fan_triangle(fan).barycentric(c);
    let (ids, _) = basis.sub.lattice.sub_triangle(fan, l);
    (ids, Triangle([basis.sub.nodes[ids[0]], basis.sub.nodes[ids[1]], basis.sub.nodes[ids[2]]]))
}

fn values_at(basis: &ElementRbBasis, ids: &[usize; 3], t: &Triangle, q: Point, out: &mut [f64]) {
    let l = t.barycentric(q);
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..3).map(|a| l[a] * basis.values[(ids[a], i)]).sum();
    }
}

/// Local cross mass `∫ e^rb_{F,a} e^rb_{C,p}` over the overlap of two cells,
/// and the overlap area.
///
/// Every fan triangle pair is clipped, then cut by the refinement lines of
/// both lattices so that each piece lies in one sub-triangle of each cell;
/// both rb functions are linear there and the product is integrated exactly.
pub fn cell_pair_mass(fine: &ElementRbBasis, coarse: &ElementRbBasis) -> (DMatrix<f64>, f64) {
    let (nf, nc) = (fine.num_dofs(), coarse.num_dofs());
    let mut block = DMatrix::zeros(nf, nc);
    let mut area = 0.0;
    let fine_fans: Vec<Triangle> = (0..nf).map(|i| fine.sub.fan_triangle(i)).collect();
    let coarse_fans: Vec<Triangle> = (0..nc).map(|i| coarse.sub.fan_triangle(i)).collect();
    let coarse_boxes: Vec<_> = coarse_fans.iter().map(|t| crate::geometry::BoundingBox::of(&t.0)).collect();
    let (mut vf, mut vc) = (vec![0.0; nf], vec![0.0; nc]);
    for (fi, tf) in fine_fans.iter().enumerate() {
        let bf = crate::geometry::BoundingBox::of(&tf.0);
        let lf = LatticeCoords::new(tf, fine.sub.lattice.subdivisions());
        for (ci, tc) in coarse_fans.iter().enumerate() {
            if !bf.overlaps(&coarse_boxes[ci], 0.0) {
                continue;
            }
            let overlap = clip_convex(&tf.0, &tc.0);
            if overlap.is_empty() {
                continue;
            }
            let lc = LatticeCoords::new(tc, coarse.sub.lattice.subdivisions());
            let mut pieces = vec![overlap];
            for k in 0..3 {
                pieces = slice(pieces, |p| lf.eval(k, p));
            }
            for k in 0..3 {
                pieces = slice(pieces, |p| lc.eval(k, p));
            }
            for piece in pieces {
                let a = signed_area(&piece);
                if a <= 0.0 {
                    continue;
                }
                area += a;
                let c = polygon_centroid(&piece);
                let (idf, trf) = sub_triangle_values(fine, fi, c);
                let (idc, trc) = sub_triangle_values(coarse, ci, c);
                for (q, w) in convex_quadrature(&piece) {
                    values_at(fine, &idf, &trf, q, &mut vf);
                    values_at(coarse, &idc, &trc, q, &mut vc);
                    for a in 0..nf {
                        let wa = w * vf[a];
                        for p in 0..nc {
                            block[(a, p)] += wa * vc[p];
                        }
                    }
                }
            }
        }
    }
    (block, area)
}

/// Supermesh cross mass `B[a, p] = ∫ e^rb_{fine,a} e^rb_{coarse,p}` over the
/// free DOFs of both levels.
pub fn cross_mass(coarse: RbLevel<'_>, fine: RbLevel<'_>) -> Result<SparseMatrix> {
    let cand = candidate_pairs(fine.mesh, coarse.mesh);
    let per_cell: Vec<(Vec<(usize, DMatrix<f64>)>, f64)> = cand
        .par_iter()
        .enumerate()
        .map(|(f, cs)| {
            let mut blocks = Vec::new();
            let mut area = 0.0;
            for &c in cs {
                let (b, a) = cell_pair_mass(&fine.bases[f], &coarse.bases[c]);
                if a > 0.0 {
                    area += a;
                    blocks.push((c, b));
                }
            }
            (blocks, area)
        })
        .collect();
    let total: f64 = per_cell.iter().map(|(_, a)| a).sum();
    let expected = fine.mesh.total_area();
    if (total - expected).abs() > 1e-8 {
        return Err(Error::CoverageGap { area: total, expected });
    }
    let mut t = Vec::new();
    for (f, (blocks, _)) in per_cell.iter().enumerate() {
        let fcell = fine.mesh.cell(f);
        for (c, b) in blocks {
            let ccell = coarse.mesh.cell(*c);
            for (a, &va) in fcell.iter().enumerate() {
                let Some(da) = fine.dofs.vertex_to_dof[va] else { continue };
                for (p, &vp) in ccell.iter().enumerate() {
                    let Some(dp) = coarse.dofs.vertex_to_dof[vp] else { continue };
                    t.push((da, dp, b[(a, p)]));
                }
            }
        }
    }
    SparseMatrix::from_triplets(fine.dofs.num_dofs(), coarse.dofs.num_dofs(), t)
}

/// Total overlap area found by the supermesh construction.
pub fn supermesh_area(coarse: RbLevel<'_>, fine: RbLevel<'_>) -> f64 {
    let cand = candidate_pairs(fine.mesh, coarse.mesh);
    let per_cell: Vec<f64> = cand
        .par_iter()
        .enumerate()
        .map(|(f, cs)| cs.iter().map(|&c| cell_pair_mass(&fine.bases[f], &coarse.bases[c]).1).sum())
        .collect();
    per_cell.iter().sum()
}
