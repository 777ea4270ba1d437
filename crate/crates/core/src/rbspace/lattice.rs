use crate::geometry::{Point, Polygon, Triangle};
use crate::{Error, Result};

/// Node of the refined fan sub-triangulation, in lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeNode {
    Centroid,
    /// Point `k / n` of the way from the centroid to vertex `vertex`.
    Spoke { vertex: usize, k: usize },
    /// Strictly inside fan triangle `fan`, or on its polygon edge when `k1 + k2 = n`.
    Face { fan: usize, k1: usize, k2: usize },
}

/// Topology of the fan sub-triangulation of an N-gon: the polygon is fanned
/// from its centroid and each fan triangle `(c, v_i, v_{i+1})` is uniformly
/// refined into `4^depth` triangles. Depends only on `(N, depth)`, so node
/// vectors of different N-gons live in the same space.
#[derive(Debug, Clone, PartialEq)]
pub struct FanLattice {
    n_vertices: usize,
    depth: usize,
    n: usize,
    nodes: Vec<LatticeNode>,
    /// (local index within fan) -> face node offset table, indexed by (k1, k2)
    face_local: Vec<Vec<usize>>,
    faces_per_fan: usize,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    interior_nodes: Vec<usize>,
    boundary_nodes: Vec<usize>,
    /// Position of each node in `interior_nodes` / `boundary_nodes`.
    slot: Vec<usize>,
}

impl FanLattice {
    pub fn new(n_vertices: usize, depth: usize) -> Result<Self> {
        if n_vertices < 3 {
            return Err(Error::DegenerateGeometry(format!(
                "{n_vertices}-gon has no fan triangulation"
            )));
        }
        if depth == 0 || depth > 8 {
            return Err(Error::Config(format!("refinement depth {depth} not in 1..=8")));
        }
        let n = 1usize << depth;
        let mut face_local = vec![vec![usize::MAX; n + 1]; n + 1];
        let mut count = 0;
        for k1 in 1..n {
            for k2 in 1..=n - k1 {
                face_local[k1][k2] = count;
                count += 1;
            }
        }
        let mut l = FanLattice {
            n_vertices,
            depth,
            n,
            nodes: Vec::new(),
            face_local,
            faces_per_fan: count,
            triangles: Vec::new(),
            boundary: Vec::new(),
            interior_nodes: Vec::new(),
            boundary_nodes: Vec::new(),
            slot: Vec::new(),
        };
        l.nodes.push(LatticeNode::Centroid);
        for vertex in 0..n_vertices {
            for k in 1..=n {
                l.nodes.push(LatticeNode::Spoke { vertex, k });
            }
        }
        for fan in 0..n_vertices {
            for k1 in 1..n {
                for k2 in 1..=n - k1 {
                    l.nodes.push(LatticeNode::Face { fan, k1, k2 });
                }
            }
        }
        for (idx, node) in l.nodes.iter().enumerate() {
            debug_assert_eq!(l.index_of(*node), idx);
        }
        l.boundary = l
            .nodes
            .iter()
            .map(|nd| match *nd {
                LatticeNode::Centroid => false,
                LatticeNode::Spoke { k, .. } => k == n,
                LatticeNode::Face { k1, k2, .. } => k1 + k2 == n,
            })
            .collect();
        l.slot = vec![0; l.nodes.len()];
        for i in 0..l.nodes.len() {
            if l.boundary[i] {
                l.slot[i] = l.boundary_nodes.len();
                l.boundary_nodes.push(i);
            } else {
                l.slot[i] = l.interior_nodes.len();
                l.interior_nodes.push(i);
            }
        }
        for fan in 0..n_vertices {
            for a in 0..n {
                for b in 0..n - a {
                    l.triangles.push([
                        l.node_at(fan, a, b),
                        l.node_at(fan, a + 1, b),
                        l.node_at(fan, a, b + 1),
                    ]);
                    if a + b + 2 <= n {
                        l.triangles.push([
                            l.node_at(fan, a + 1, b),
                            l.node_at(fan, a + 1, b + 1),
                            l.node_at(fan, a, b + 1),
                        ]);
                    }
                }
            }
        }
        Ok(l)
    }

    fn index_of(&self, node: LatticeNode) -> usize {
        match node {
            LatticeNode::Centroid => 0,
            LatticeNode::Spoke { vertex, k } => 1 + vertex * self.n + (k - 1),
            LatticeNode::Face { fan, k1, k2 } => {
                1 + self.n_vertices * self.n + fan * self.faces_per_fan + self.face_local[k1][k2]
            }
        }
    }

    /// Node at lattice point `(k1, k2)` of fan triangle `fan`, where `k1`
    /// counts towards vertex `fan` and `k2` towards vertex `fan + 1`.
    pub fn node_at(&self, fan: usize, k1: usize, k2: usize) -> usize {
        let next = (fan + 1) % self.n_vertices;
        match (k1, k2) {
            (0, 0) => 0,
            (k, 0) => self.index_of(LatticeNode::Spoke { vertex: fan, k }),
            (0, k) => self.index_of(LatticeNode::Spoke { vertex: next, k }),
            (k1, k2) => self.index_of(LatticeNode::Face { fan, k1, k2 }),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Subdivisions per fan-triangle side, `2^depth`.
    pub fn subdivisions(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[LatticeNode] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    /// Index of `node` within the interior or boundary node list.
    pub fn slot(&self, node: usize) -> usize {
        self.slot[node]
    }

    /// The node at the same lattice position once vertex labels are shifted
    /// by `s` (vertex `v` becomes `v + s`).
    pub fn rotated(&self, node: usize, s: usize) -> usize {
        let nv = self.n_vertices;
        match self.nodes[node] {
            LatticeNode::Centroid => 0,
            LatticeNode::Spoke { vertex, k } => self.index_of(LatticeNode::Spoke {
                vertex: (vertex + s) % nv,
                k,
            }),
            LatticeNode::Face { fan, k1, k2 } => self.index_of(LatticeNode::Face {
                fan: (fan + s) % nv,
                k1,
                k2,
            }),
        }
    }

    /// Node sitting on polygon vertex `i`.
    pub fn vertex_node(&self, i: usize) -> usize {
        self.index_of(LatticeNode::Spoke {
            vertex: i,
            k: self.n,
        })
    }

    /// Trace of the vertex hat functions at a boundary node: pairs (vertex, value).
    pub fn hat_trace(&self, node: usize) -> [(usize, f64); 2] {
        match self.nodes[node] {
            LatticeNode::Spoke { vertex, k } if k == self.n => [(vertex, 1.0), (vertex, 0.0)],
            LatticeNode::Face { fan, k1, k2 } if k1 + k2 == self.n => {
                let nf = self.n as f64;
                [
                    (fan, k1 as f64 / nf),
                    ((fan + 1) % self.n_vertices, k2 as f64 / nf),
                ]
            }
            _ => [(0, 0.0), (0, 0.0)],
        }
    }

    /// Node positions for a concrete polygon fanned from `center`.
    pub fn positions(&self, vertices: &[Point], center: Point) -> Vec<Point> {
        let nf = self.n as f64;
        self.nodes
            .iter()
            .map(|nd| match *nd {
                LatticeNode::Centroid => center,
                LatticeNode::Spoke { vertex, k } => {
                    if k == self.n {
                        vertices[vertex]
                    } else {
                        center + (vertices[vertex] - center) * (k as f64 / nf)
                    }
                }
                LatticeNode::Face { fan, k1, k2 } => {
                    let next = (fan + 1) % self.n_vertices;
                    center
                        + (vertices[fan] - center) * (k1 as f64 / nf)
                        + (vertices[next] - center) * (k2 as f64 / nf)
                }
            })
            .collect()
    }

    /// Sub-triangle containing the point with fan-barycentric coordinates
    /// `l = (λ_c, λ_i, λ_{i+1})`: its three nodes and the local barycentric
    /// coordinates of the point (affinely extended when slightly outside).
    pub fn sub_triangle(&self, fan: usize, l: [f64; 3]) -> ([usize; 3], [f64; 3]) {
        let nf = self.n as f64;
        let (s1, s2) = (nf * l[1], nf * l[2]);
        let f1 = (s1.floor().max(0.0) as usize).min(self.n - 1);
        let f2 = (s2.floor().max(0.0) as usize).min(self.n - 1 - f1);
        let (t1, t2) = (s1 - f1 as f64, s2 - f2 as f64);
        if t1 + t2 <= 1.0 || f1 + f2 + 1 >= self.n {
            (
                [
                    self.node_at(fan, f1, f2),
                    self.node_at(fan, f1 + 1, f2),
                    self.node_at(fan, f1, f2 + 1),
                ],
                [1.0 - t1 - t2, t1, t2],
            )
        } else {
            (
                [
                    self.node_at(fan, f1 + 1, f2),
                    self.node_at(fan, f1 + 1, f2 + 1),
                    self.node_at(fan, f1, f2 + 1),
                ],
                [1.0 - t2, t1 + t2 - 1.0, 1.0 - t1],
            )
        }
    }
}

/// The lattice placed on a concrete polygon.
#[derive(Debug, Clone)]
pub struct SubTriangulation {
    pub lattice: std::sync::Arc<FanLattice>,
    pub center: Point,
    pub vertices: Vec<Point>,
    pub nodes: Vec<Point>,
}

impl SubTriangulation {
    pub fn new(lattice: std::sync::Arc<FanLattice>, k: &Polygon) -> Result<Self> {
        if lattice.n_vertices() != k.len() {
            return Err(Error::ShapeMismatch {
                expected: lattice.n_vertices(),
                found: k.len(),
            });
        }
        let center = k.centroid();
        if !k.is_star_shaped_wrt(center) {
            return Err(Error::SingularLocalSolve(
                "polygon is not star-shaped with respect to its centroid".into(),
            ));
        }
        let nodes = lattice.positions(k.vertices(), center);
        Ok(SubTriangulation {
            lattice,
            center,
            vertices: k.vertices().to_vec(),
            nodes,
        })
    }

    pub fn triangle(&self, t: usize) -> Triangle {
        let [a, b, c] = self.lattice.triangles()[t];
        Triangle([self.nodes[a], self.nodes[b], self.nodes[c]])
    }

    pub fn fan_triangle(&self, fan: usize) -> Triangle {
        let next = (fan + 1) % self.vertices.len();
        Triangle([self.center, self.vertices[fan], self.vertices[next]])
    }

    /// Fan triangle containing `p` and its barycentric coordinates there.
    pub fn locate(&self, p: Point, tol: f64) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for fan in 0..self.vertices.len() {
            let l = self.fan_triangle(fan).barycentric(p);
            let m = l[0].min(l[1]).min(l[2]);
            if best.is_none_or(|b| m > b.2) {
                best = Some((fan, l, m));
            }
        }
        best.filter(|b| b.2 >= -tol).map(|b| (b.0, b.1))
    }
}

/// P1 stiffness of one triangle: `k_ab = (e_a · e_b) / (4|T|)` with `e_a` the
/// edge opposite node `a`.
pub fn p1_stiffness(t: &Triangle) -> [[f64; 3]; 3] {
    let [p0, p1, p2] = t.0;
    let e = [p2 - p1, p0 - p2, p1 - p0];
    let a4 = 4.0 * t.area();
    let mut k = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            k[a][b] = e[a].dot(e[b]) / a4;
        }
    }
    k
}

/// P1 mass of one triangle.
pub fn p1_mass(t: &Triangle) -> [[f64; 3]; 3] {
    let a = t.area() / 12.0;
    let mut m = [[a; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 2.0 * a;
    }
    m
}
