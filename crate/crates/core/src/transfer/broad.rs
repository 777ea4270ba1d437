use crate::geometry::BoundingBox;
use crate::mesh::PolygonalMesh;

const BOX_TOL: f64 = 1e-12;

/// For every fine cell, the coarse cells whose bounding boxes overlap its own,
/// found through a uniform bucket grid over the coarse boxes. Lists are sorted.
pub fn candidate_pairs(fine: &PolygonalMesh, coarse: &PolygonalMesh) -> Vec<Vec<usize>> {
    let boxes: Vec<BoundingBox> = (0..coarse.num_cells()).map(|c| coarse.cell_bounding_box(c)).collect();
    let fine_boxes: Vec<BoundingBox> = (0..fine.num_cells()).map(|c| fine.cell_bounding_box(c)).collect();
    let mut lo = crate::geometry::Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = crate::geometry::Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for b in &boxes {
        lo = crate::geometry::Point::new(lo.x.min(b.min.x), lo.y.min(b.min.y));
        hi = crate::geometry::Point::new(hi.x.max(b.max.x), hi.y.max(b.max.y));
    }
    let g = ((boxes.len() as f64).sqrt().ceil() as usize).max(1);
    let w = ((hi.x - lo.x) / g as f64).max(f64::MIN_POSITIVE);
    let hgt = ((hi.y - lo.y) / g as f64).max(f64::MIN_POSITIVE);
    let cell_of = |x: f64, y: f64| {
        let i = (((x - lo.x) / w).floor().max(0.0) as usize).min(g - 1);
        let j = (((y - lo.y) / hgt).floor().max(0.0) as usize).min(g - 1);
        (i, j)
    };
    let mut buckets = vec![Vec::new(); g * g];
    for (c, b) in boxes.iter().enumerate() {
        let (i0, j0) = cell_of(b.min.x - BOX_TOL, b.min.y - BOX_TOL);
        let (i1, j1) = cell_of(b.max.x + BOX_TOL, b.max.y + BOX_TOL);
        for j in j0..=j1 {
            for i in i0..=i1 {
                buckets[j * g + i].push(c);
            }
        }
    }
    fine_boxes
        .iter()
        .map(|fb| {
            let (i0, j0) = cell_of(fb.min.x - BOX_TOL, fb.min.y - BOX_TOL);
            let (i1, j1) = cell_of(fb.max.x + BOX_TOL, fb.max.y + BOX_TOL);
            let mut out = Vec::new();
            for j in j0..=j1 {
                for i in i0..=i1 {
                    out.extend(buckets[j * g + i].iter().copied().filter(|&c| boxes[c].overlaps(fb, BOX_TOL)));
                }
            }
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect()
}
