//! Signed circumcentric dual of a triangle mesh and the diagonal Hodge stars.
//!
//! Each triangle contributes, for each of its sides, the signed distance from the
//! side's midpoint to the triangle's circumcenter, measured along the inward
//! normal of that side within the triangle's own plane. A circumcenter beyond the
//! side gives a negative contribution, so the dual edge of a non-Delaunay pair
//! ends up with negative length and the adjacent dual cell sectors with negative
//! area. All sums run in triangle-index order and are bit-reproducible.

use std::io::{self, Write};

use thiserror::Error;

use crate::mesh::SimplicialComplex2;
use crate::sparse::SparseMatrix;
use crate::Point3;

/// Dual volumes with magnitude below this cannot be inverted.
pub const ZERO_VOLUME_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualError {
    #[error("degenerate triangle (doubled area {doubled_area:.3e})")]
    DegenerateTriangle { doubled_area: f64 },
    #[error("{kind} {index} has signed dual volume {value:.3e}; preprocess the mesh to remove zero dual volumes")]
    ZeroDualVolume { kind: &'static str, index: usize, value: f64 },
}

/// Circumcenter of a triangle in 3-space; lies in the triangle's plane.
pub fn circumcenter(p0: Point3, p1: Point3, p2: Point3) -> Result<Point3, DualError> {
    let a = p1 - p0;
    let b = p2 - p0;
    let axb = a.cross(&b);
    let n2 = axb.norm_squared();
    if n2.is_nan() || n2.sqrt() < crate::mesh::DEGENERATE_DOUBLED_AREA {
        return Err(DualError::DegenerateTriangle { doubled_area: n2.sqrt() });
    }
    Ok(p0 + (a.norm_squared() * b - b.norm_squared() * a).cross(&axb) / (2.0 * n2))
}

/// Sign of the circumcenter's side of local edge `k` relative to the opposite
/// vertex: +1 same side, −1 opposite side, 0 on the line. Evaluated from
/// orientation determinants, independently of [`DualMetrics`].
pub fn side_of_line_sign(p: [Point3; 3], c: Point3, k: usize) -> i8 {
    let (a, b, apex) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
    let e = b - a;
    let n = e.cross(&(apex - a));
    let side_c = e.cross(&(c - a)).dot(&n);
    let scale = n.norm_squared();
    if side_c.abs() <= 1e-14 * scale {
        0
    } else if side_c > 0.0 {
        1
    } else {
        -1
    }
}

/// Per-simplex signed dual volumes.
#[derive(Clone, Debug)]
pub struct DualMetrics {
    pub circumcenters: Vec<Point3>,
    pub primal_edge_length: Vec<f64>,
    pub triangle_area: Vec<f64>,
    /// Signed distance from the midpoint of local side `k` of each triangle to the
    /// triangle's circumcenter, positive towards the interior.
    pub half_dual_length: Vec<[f64; 3]>,
    pub dual_edge_length: Vec<f64>,
    pub dual_cell_area: Vec<f64>,
    /// `½ |σ¹| |⋆σ¹|`.
    pub support_area: Vec<f64>,
    pub star0: Vec<f64>,
    pub star1: Vec<f64>,
    pub star2: Vec<f64>,
}

/// Diagonal Hodge stars and their inverses.
#[derive(Clone, Debug)]
pub struct HodgeStars {
    pub star0: Vec<f64>,
    pub star1: Vec<f64>,
    pub star2: Vec<f64>,
    pub star0_inv: Vec<f64>,
    pub star1_inv: Vec<f64>,
    pub star2_inv: Vec<f64>,
}

fn invert(kind: &'static str, volumes: &[f64], coefficients: &[f64]) -> Result<Vec<f64>, DualError> {
    volumes
        .iter()
        .zip(coefficients)
        .enumerate()
        .map(|(index, (&v, &c))| {
            if v.abs() < ZERO_VOLUME_TOLERANCE {
                Err(DualError::ZeroDualVolume { kind, index, value: v })
            } else {
                Ok(1.0 / c)
            }
        })
        .collect()
}

impl DualMetrics {
    pub fn new(m: &SimplicialComplex2) -> Result<Self, DualError> {
        let nt = m.num_triangles();
        let mut circumcenters = Vec::with_capacity(nt);
        let mut half_dual_length = Vec::with_capacity(nt);
        let mut triangle_area = Vec::with_capacity(nt);
        let mut dual_edge_length = vec![0.0; m.num_edges()];
        let mut dual_cell_area = vec![0.0; m.num_nodes()];

        for t in 0..nt {
            let p = m.triangle_points(t);
            let c = circumcenter(p[0], p[1], p[2])?;
            let normal = (p[1] - p[0]).cross(&(p[2] - p[0]));
            triangle_area.push(0.5 * normal.norm());
            let normal = normal.normalize();
            let tri = m.triangles()[t];
            let edges = m.triangle_edges(t);
            let mut h = [0.0; 3];
            for k in 0..3 {
                let (a, b) = (p[k], p[(k + 1) % 3]);
                let e = b - a;
                let len = e.norm();
                let inward = normal.cross(&e) / len;
                h[k] = (c - 0.5 * (a + b)).dot(&inward);
                dual_edge_length[edges[k]] += h[k];
                let sector = 0.25 * len * h[k];
                dual_cell_area[tri[k]] += sector;
                dual_cell_area[tri[(k + 1) % 3]] += sector;
            }
            circumcenters.push(c);
            half_dual_length.push(h);
        }

        let primal_edge_length: Vec<f64> = (0..m.num_edges()).map(|e| m.edge_length(e)).collect();
        let support_area = primal_edge_length.iter().zip(&dual_edge_length).map(|(l, d)| 0.5 * l * d).collect();
        let star1 = dual_edge_length.iter().zip(&primal_edge_length).map(|(d, l)| d / l).collect();
        let star2 = triangle_area.iter().map(|a| 1.0 / a).collect();
        Ok(Self {
            circumcenters,
            star0: dual_cell_area.clone(),
            star1,
            star2,
            primal_edge_length,
            triangle_area,
            half_dual_length,
            dual_edge_length,
            dual_cell_area,
            support_area,
        })
    }

    pub fn signed_dual_edge_length(&self, e: usize) -> f64 {
        self.dual_edge_length[e]
    }

    pub fn signed_dual_cell_area(&self, v: usize) -> f64 {
        self.dual_cell_area[v]
    }

    pub fn support_area(&self, e: usize) -> f64 {
        self.support_area[e]
    }

    pub fn star0_inv(&self) -> Result<Vec<f64>, DualError> {
        invert("dual cell of node", &self.dual_cell_area, &self.star0)
    }

    pub fn star1_inv(&self) -> Result<Vec<f64>, DualError> {
        invert("dual edge of edge", &self.dual_edge_length, &self.star1)
    }

    pub fn star2_inv(&self) -> Vec<f64> {
        self.triangle_area.clone()
    }

    /// All six diagonal stars; fails if any dual cell or dual edge has zero volume.
    pub fn hodge_stars(&self) -> Result<HodgeStars, DualError> {
        Ok(HodgeStars {
            star0_inv: self.star0_inv()?,
            star1_inv: self.star1_inv()?,
            star2_inv: self.star2_inv(),
            star0: self.star0.clone(),
            star1: self.star1.clone(),
            star2: self.star2.clone(),
        })
    }

    pub fn min_dual_edge_length(&self) -> f64 {
        self.dual_edge_length.iter().fold(f64::INFINITY, |m, &d| m.min(d.abs()))
    }

    pub fn min_dual_cell_area(&self) -> f64 {
        self.dual_cell_area.iter().fold(f64::INFINITY, |m, &a| m.min(a.abs()))
    }

    /// CSV rows `kind,index,value` for every signed dual volume.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "kind,index,value")?;
        for (i, v) in self.dual_cell_area.iter().enumerate() {
            writeln!(w, "dual_cell_area,{i},{v:.16e}")?;
        }
        for (i, v) in self.dual_edge_length.iter().enumerate() {
            writeln!(w, "dual_edge_length,{i},{v:.16e}")?;
        }
        for (i, v) in self.support_area.iter().enumerate() {
            writeln!(w, "support_area,{i},{v:.16e}")?;
        }
        for (i, v) in self.triangle_area.iter().enumerate() {
            writeln!(w, "triangle_area,{i},{v:.16e}")?;
        }
        Ok(())
    }
}

/// Closure of the dual-cell contours of boundary nodes along the boundary.
///
/// Shape `#nodes × #boundary edges`; column `j` belongs to boundary edge
/// `m.boundary_edges()[j] = [a, b]` and holds `σ/2` at `a` and at `b`, where `σ`
/// is the orientation the edge's only triangle induces on it. Applied to the
/// primal 1-form values on boundary edges it adds half of each boundary edge to
/// each endpoint's counterclockwise contour.
pub fn boundary_closure_matrix(m: &SimplicialComplex2) -> SparseMatrix {
    let mut triplets = Vec::with_capacity(2 * m.boundary_edges().len());
    for (j, &e) in m.boundary_edges().iter().enumerate() {
        let [a, b] = m.edges()[e];
        let sign = f64::from(m.edge_triangles(e)[0].sign);
        triplets.push((a, j, 0.5 * sign));
        triplets.push((b, j, 0.5 * sign));
    }
    SparseMatrix::from_triplets(m.num_nodes(), m.boundary_edges().len(), &triplets)
}
