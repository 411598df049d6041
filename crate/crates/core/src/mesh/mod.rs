//! Oriented simplicial 2-complexes embedded in 3-space.

mod off;
mod quality;

pub use off::{parse_off, read_mesh, write_mesh, write_off};
pub use quality::{aspect_ratio, incircle_pair, incircle_unfolded, MeshQuality, DELAUNAY_TOLERANCE};

use std::collections::HashMap;

use thiserror::Error;

use crate::sparse::SparseMatrix;
use crate::Point3;

/// Triangles whose doubled area falls below this are rejected.
pub const DEGENERATE_DOUBLED_AREA: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("triangle {triangle} references node {index}, but only {nodes} nodes exist")]
    IndexOutOfRange { triangle: usize, index: usize, nodes: usize },
    #[error("triangle {triangle} is degenerate (doubled area {doubled_area:.3e})")]
    DegenerateTriangle { triangle: usize, doubled_area: f64 },
    #[error("edge [{0}, {1}] has more than two incident triangles")]
    NonManifoldEdge(usize, usize),
    #[error("edge [{0}, {1}] has the same induced orientation in both incident triangles")]
    InconsistentOrientation(usize, usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
}

/// One triangle incident to an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeIncidence {
    pub triangle: usize,
    /// Local edge slot `k`: the edge runs between corners `k` and `k + 1 (mod 3)`.
    pub local: usize,
    /// +1 when the triangle traverses the edge from its smaller to its larger node.
    pub sign: i8,
}

/// Triangle mesh with canonical edges and adjacency.
///
/// Edges are stored as `[a, b]` with `a < b` in order of first appearance while
/// walking each triangle's sides `(v0,v1), (v1,v2), (v2,v0)`. Every module
/// addresses 1-forms through these canonical indices and orientations.
#[derive(Clone, Debug)]
pub struct SimplicialComplex2 {
    nodes: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    triangle_edges: Vec<[usize; 3]>,
    triangle_edge_signs: Vec<[i8; 3]>,
    edge_triangles: Vec<Vec<EdgeIncidence>>,
    node_triangles: Vec<Vec<usize>>,
    boundary_edges: Vec<usize>,
    boundary_nodes: Vec<usize>,
    node_on_boundary: Vec<bool>,
    /// Per-triangle corner coordinates for complexes whose nodes were identified
    /// (periodic meshes); otherwise corners are looked up from `nodes`.
    corners: Option<Vec<[Point3; 3]>>,
}

impl SimplicialComplex2 {
    /// Build a complex, enumerating edges and verifying manifoldness,
    /// orientation consistency and non-degeneracy.
    pub fn new(nodes: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        Self::build(nodes, triangles, None)
    }

    /// Build a complex whose triangle geometry is given per corner rather than by
    /// node lookup. Used for identified (periodic) meshes.
    pub fn with_corner_positions(
        nodes: Vec<Point3>,
        triangles: Vec<[usize; 3]>,
        corners: Vec<[Point3; 3]>,
    ) -> Result<Self, MeshError> {
        assert_eq!(corners.len(), triangles.len(), "one corner triple per triangle");
        Self::build(nodes, triangles, Some(corners))
    }

    fn build(
        nodes: Vec<Point3>,
        triangles: Vec<[usize; 3]>,
        corners: Option<Vec<[Point3; 3]>>,
    ) -> Result<Self, MeshError> {
        let nv = nodes.len();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&v| v >= nv) {
                return Err(MeshError::IndexOutOfRange { triangle: t, index, nodes: nv });
            }
            let p = match &corners {
                Some(c) => c[t],
                None => tri.map(|v| nodes[v]),
            };
            let doubled_area = (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
            if doubled_area.is_nan()
                || doubled_area < DEGENERATE_DOUBLED_AREA
                || tri[0] == tri[1]
                || tri[1] == tri[2]
                || tri[0] == tri[2]
            {
                return Err(MeshError::DegenerateTriangle { triangle: t, doubled_area });
            }
        }

        let mut index: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges = Vec::new();
        let mut edge_triangles: Vec<Vec<EdgeIncidence>> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        let mut triangle_edge_signs = Vec::with_capacity(triangles.len());
        let mut node_triangles = vec![Vec::new(); nv];
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0usize; 3];
            let mut ts = [0i8; 3];
            for k in 0..3 {
                let (u, v) = (tri[k], tri[(k + 1) % 3]);
                let key = (u.min(v), u.max(v));
                let e = *index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_triangles.push(Vec::with_capacity(2));
                    edges.len() - 1
                });
                let sign = if u < v { 1 } else { -1 };
                let star = &mut edge_triangles[e];
                if star.len() == 2 {
                    return Err(MeshError::NonManifoldEdge(key.0, key.1));
                }
                if star.iter().any(|inc| inc.sign == sign) {
                    return Err(MeshError::InconsistentOrientation(key.0, key.1));
                }
                star.push(EdgeIncidence { triangle: t, local: k, sign });
                te[k] = e;
                ts[k] = sign;
                node_triangles[tri[k]].push(t);
            }
            triangle_edges.push(te);
            triangle_edge_signs.push(ts);
        }

        let boundary_edges: Vec<usize> = (0..edges.len()).filter(|&e| edge_triangles[e].len() == 1).collect();
        let mut node_on_boundary = vec![false; nv];
        for &e in &boundary_edges {
            node_on_boundary[edges[e][0]] = true;
            node_on_boundary[edges[e][1]] = true;
        }
        let boundary_nodes = (0..nv).filter(|&v| node_on_boundary[v]).collect();

        Ok(Self {
            nodes,
            triangles,
            edges,
            triangle_edges,
            triangle_edge_signs,
            edge_triangles,
            node_triangles,
            boundary_edges,
            boundary_nodes,
            node_on_boundary,
            corners,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_nodes() as i64 - self.num_edges() as i64 + self.num_triangles() as i64
    }

    pub fn nodes(&self) -> &[Point3] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Canonical edge indices of the three sides `(v0,v1), (v1,v2), (v2,v0)`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    /// Induced orientation of each side relative to its canonical edge.
    pub fn triangle_edge_signs(&self, t: usize) -> [i8; 3] {
        self.triangle_edge_signs[t]
    }

    pub fn edge_triangles(&self, e: usize) -> &[EdgeIncidence] {
        &self.edge_triangles[e]
    }

    pub fn node_triangles(&self, v: usize) -> &[usize] {
        &self.node_triangles[v]
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn is_boundary_node(&self, v: usize) -> bool {
        self.node_on_boundary[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_triangles[e].len() == 1
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_edges()).filter(|&e| !self.is_boundary_edge(e))
    }

    pub fn is_periodic(&self) -> bool {
        self.corners.is_some()
    }

    /// Corner coordinates of triangle `t` in its own (unidentified) frame.
    pub fn triangle_points(&self, t: usize) -> [Point3; 3] {
        match &self.corners {
            Some(c) => c[t],
            None => self.triangles[t].map(|v| self.nodes[v]),
        }
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let p = self.triangle_points(t);
        0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm()
    }

    pub fn triangle_normal(&self, t: usize) -> Point3 {
        let p = self.triangle_points(t);
        (p[1] - p[0]).cross(&(p[2] - p[0])).normalize()
    }

    pub fn triangle_centroid(&self, t: usize) -> Point3 {
        let p = self.triangle_points(t);
        (p[0] + p[1] + p[2]) / 3.0
    }

    /// Endpoints of edge `e` oriented from its smaller to its larger node, taken
    /// from the frame of its first incident triangle.
    pub fn edge_endpoints(&self, e: usize) -> (Point3, Point3) {
        let inc = self.edge_triangles[e][0];
        let p = self.triangle_points(inc.triangle);
        let (u, v) = (p[inc.local], p[(inc.local + 1) % 3]);
        if inc.sign > 0 {
            (u, v)
        } else {
            (v, u)
        }
    }

    pub fn edge_vector(&self, e: usize) -> Point3 {
        let (a, b) = self.edge_endpoints(e);
        b - a
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        self.edge_vector(e).norm()
    }

    pub fn edge_midpoint(&self, e: usize) -> Point3 {
        let (a, b) = self.edge_endpoints(e);
        0.5 * (a + b)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn is_flat(&self) -> bool {
        let z0 = self.nodes.first().map_or(0.0, |p| p.z);
        self.nodes.iter().all(|p| p.z == z0)
    }

    /// Same connectivity with new node coordinates.
    pub fn with_nodes(&self, nodes: Vec<Point3>) -> Result<Self, MeshError> {
        assert_eq!(nodes.len(), self.nodes.len());
        if self.corners.is_some() {
            // periodic geometry is defined per corner and cannot be moved node-wise
            panic!("with_nodes is not supported on identified complexes");
        }
        Self::new(nodes, self.triangles.clone())
    }

    /// Signed incidence of nodes on edges: row `[a, b]` holds −1 at `a`, +1 at `b`.
    pub fn d0(&self) -> SparseMatrix {
        let mut triplets = Vec::with_capacity(2 * self.num_edges());
        for (e, &[a, b]) in self.edges.iter().enumerate() {
            triplets.push((e, a, -1.0));
            triplets.push((e, b, 1.0));
        }
        SparseMatrix::from_triplets(self.num_edges(), self.num_nodes(), &triplets)
    }

    /// Signed incidence of edges on triangles under the counterclockwise orientation.
    pub fn d1(&self) -> SparseMatrix {
        let mut triplets = Vec::with_capacity(3 * self.num_triangles());
        for t in 0..self.num_triangles() {
            for k in 0..3 {
                triplets.push((t, self.triangle_edges[t][k], f64::from(self.triangle_edge_signs[t][k])));
            }
        }
        SparseMatrix::from_triplets(self.num_triangles(), self.num_edges(), &triplets)
    }

    pub fn exterior_derivative_matrices(&self) -> (SparseMatrix, SparseMatrix) {
        (self.d0(), self.d1())
    }
}
