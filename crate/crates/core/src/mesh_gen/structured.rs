use std::f64::consts::PI;

use super::GenError;
use crate::mesh::SimplicialComplex2;
use crate::Point3;

/// Coordinates within this distance are taken to coincide across a periodic seam.
pub const PERIODIC_TOLERANCE: f64 = 1e-9;

/// Unit square split into `n × n` cells, each cut by its rising diagonal into two
/// right isosceles triangles. Node `(i, j)` sits at `(i/n, j/n)` with index
/// `j (n + 1) + i`.
pub fn structured_grid(n: usize) -> Result<SimplicialComplex2, GenError> {
    if n == 0 {
        return Err(GenError::InvalidSpec("grid needs at least one cell per side".into()));
    }
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            nodes.push(Point3::new(i as f64 * h, j as f64 * h, 0.0));
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Ok(SimplicialComplex2::new(nodes, triangles)?)
}

/// Height of the sinusoidal surface over `(x, y)`.
pub fn sinusoidal_height(x: f64, y: f64) -> f64 {
    0.1 * (4.0 * PI * x).sin() * (4.0 * PI * y).cos()
}

/// Lift a flat mesh onto `z = 0.1 sin(4πx) cos(4πy)`.
pub fn lift_sinusoidal(m: &SimplicialComplex2) -> Result<SimplicialComplex2, GenError> {
    if !m.is_flat() || m.is_periodic() {
        return Err(GenError::NotFlat);
    }
    let nodes = m.nodes().iter().map(|p| Point3::new(p.x, p.y, sinusoidal_height(p.x, p.y))).collect();
    Ok(m.with_nodes(nodes)?)
}

/// Split every triangle into four similar children through its edge midpoints.
///
/// The midpoint of edge `e` becomes node `#nodes + e`. Children of `[v0, v1, v2]`
/// are `[v0, m01, m20]`, `[m01, v1, m12]`, `[m20, m12, v2]` and `[m01, m12, m20]`.
pub fn midpoint_subdivide(m: &SimplicialComplex2) -> Result<SimplicialComplex2, GenError> {
    if m.is_periodic() {
        return Err(GenError::InvalidSpec("cannot subdivide an identified mesh".into()));
    }
    let nv = m.num_nodes();
    let mut nodes = m.nodes().to_vec();
    nodes.extend((0..m.num_edges()).map(|e| m.edge_midpoint(e)));
    let mut triangles = Vec::with_capacity(4 * m.num_triangles());
    for (t, &[v0, v1, v2]) in m.triangles().iter().enumerate() {
        let [e01, e12, e20] = m.triangle_edges(t);
        let (m01, m12, m20) = (nv + e01, nv + e12, nv + e20);
        triangles.push([v0, m01, m20]);
        triangles.push([m01, v1, m12]);
        triangles.push([m20, m12, v2]);
        triangles.push([m01, m12, m20]);
    }
    Ok(SimplicialComplex2::new(nodes, triangles)?)
}

/// Identify opposite sides of a mesh of the unit square, producing a torus.
///
/// A node with `x ≈ 1` is merged with the node at `x = 0` and the same `y` (and
/// likewise for `y`). Both must carry the same height. Triangle geometry keeps
/// the original per-corner coordinates, so dual quantities are computed in the
/// triangles' own planes without wrapping.
pub fn periodic_identify(m: &SimplicialComplex2) -> Result<SimplicialComplex2, GenError> {
    if m.is_periodic() {
        return Err(GenError::InvalidSpec("mesh is already identified".into()));
    }
    let nodes = m.nodes();
    let tol = PERIODIC_TOLERANCE;
    let near = |a: f64, b: f64| (a - b).abs() <= tol;
    let boundary: Vec<usize> = m.boundary_nodes().to_vec();

    // representative of each node after identification
    let mut rep: Vec<usize> = (0..nodes.len()).collect();
    for &v in &boundary {
        let p = nodes[v];
        let tx = if near(p.x, 1.0) { 0.0 } else { p.x };
        let ty = if near(p.y, 1.0) { 0.0 } else { p.y };
        if tx == p.x && ty == p.y {
            continue;
        }
        let partner = boundary
            .iter()
            .copied()
            .find(|&w| near(nodes[w].x, tx) && near(nodes[w].y, ty))
            .ok_or(GenError::MismatchedBoundary { node: v, x: p.x, y: p.y })?;
        if !near(nodes[partner].z, p.z) {
            return Err(GenError::MismatchedBoundary { node: v, x: p.x, y: p.y });
        }
        rep[v] = partner;
    }
    let mut new_index = vec![usize::MAX; nodes.len()];
    let mut kept = Vec::new();
    for v in 0..nodes.len() {
        if rep[v] == v {
            new_index[v] = kept.len();
            kept.push(nodes[v]);
        }
    }
    let triangles: Vec<[usize; 3]> = m.triangles().iter().map(|t| t.map(|v| new_index[rep[v]])).collect();
    let corners = (0..m.num_triangles()).map(|t| m.triangle_points(t)).collect();
    Ok(SimplicialComplex2::with_corner_positions(kept, triangles, corners)?)
}
