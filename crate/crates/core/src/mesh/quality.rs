use super::SimplicialComplex2;
use crate::Point3;

/// Normalized in-circle determinants at or below this are treated as Delaunay,
/// so co-circular pairs (structured right-triangle grids) count as Delaunay.
pub const DELAUNAY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshQuality {
    /// Largest circumradius / inradius over all triangles.
    pub max_aspect_ratio: f64,
    pub non_delaunay_edges: usize,
    /// Non-Delaunay interior edges over all edges.
    pub non_delaunay_edge_ratio: f64,
    pub non_delaunay_triangles: usize,
    /// Triangles belonging to at least one non-Delaunay pair, over all triangles.
    pub non_delaunay_triangle_ratio: f64,
    pub min_edge_length: f64,
    pub max_edge_length: f64,
    pub min_triangle_area: f64,
}

/// Circumradius over inradius; 2 for an equilateral triangle.
pub fn aspect_ratio(p: [Point3; 3]) -> f64 {
    let a = (p[1] - p[0]).norm();
    let b = (p[2] - p[1]).norm();
    let c = (p[0] - p[2]).norm();
    let area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
    let s = 0.5 * (a + b + c);
    a * b * c * s / (4.0 * area * area)
}

/// In-circle determinant of the pair sharing interior edge `e`, evaluated after
/// unfolding the second triangle about the edge into the plane of the first.
/// Coordinates are scaled by the edge length so the value is dimensionless.
/// Positive means the far apex lies inside the first triangle's circumcircle.
/// Returns `None` for boundary edges.
pub fn incircle_unfolded(m: &SimplicialComplex2, e: usize) -> Option<f64> {
    let [i1, i2] = match m.edge_triangles(e) {
        [i1, i2] => [*i1, *i2],
        _ => return None,
    };
    let p = m.triangle_points(i1.triangle);
    let q = m.triangle_points(i2.triangle);
    // the second triangle runs the shared edge the other way round
    Some(incircle_pair(
        [p[i1.local], p[(i1.local + 1) % 3], p[(i1.local + 2) % 3]],
        [q[(i2.local + 1) % 3], q[i2.local], q[(i2.local + 2) % 3]],
    ))
}

/// Normalized in-circle determinant for triangle `first = [a, b, c]` and the far
/// apex `d` of `second = [a', b', d]`, where `a'`, `b'` are the shared edge's
/// endpoints as seen by the second triangle (equal to `a`, `b` unless the mesh
/// is identified).
pub fn incircle_pair(first: [Point3; 3], second: [Point3; 3]) -> f64 {
    let [a, b, c] = first;
    let [a2, b2, d] = second;
    let len = (b - a).norm();
    let (cx, cy) = planar(a, b, c);
    let (dx, dy) = planar(a2, b2, d);
    let (cx, cy, dx, dy) = (cx / len, cy / len, dx / len, -dy / len);

    let (adx, ady) = (-dx, -dy);
    let (bdx, bdy) = (1.0 - dx, -dy);
    let (cdx, cdy) = (cx - dx, cy - dy);
    let al = adx * adx + ady * ady;
    let bl = bdx * bdx + bdy * bdy;
    let cl = cdx * cdx + cdy * cdy;
    adx * (bdy * cl - bl * cdy) - ady * (bdx * cl - bl * cdx) + al * (bdx * cdy - bdy * cdx)
}

/// Coordinates of `x` in the frame with origin `a`, first axis along `b − a`,
/// and the unsigned distance from that axis as the second coordinate.
fn planar(a: Point3, b: Point3, x: Point3) -> (f64, f64) {
    let axis = (b - a).normalize();
    let r = x - a;
    let along = r.dot(&axis);
    (along, (r - along * axis).norm())
}

impl SimplicialComplex2 {
    pub fn is_non_delaunay_edge(&self, e: usize) -> bool {
        incircle_unfolded(self, e).is_some_and(|det| det > DELAUNAY_TOLERANCE)
    }

    /// Per-edge non-Delaunay flags.
    pub fn non_delaunay_flags(&self) -> Vec<bool> {
        (0..self.num_edges()).map(|e| self.is_non_delaunay_edge(e)).collect()
    }

    pub fn quality_metrics(&self) -> MeshQuality {
        let flags = self.non_delaunay_flags();
        let mut flagged_triangles = vec![false; self.num_triangles()];
        for (e, _) in flags.iter().enumerate().filter(|(_, &f)| f) {
            for inc in self.edge_triangles(e) {
                flagged_triangles[inc.triangle] = true;
            }
        }
        let non_delaunay_edges = flags.iter().filter(|&&f| f).count();
        let non_delaunay_triangles = flagged_triangles.iter().filter(|&&f| f).count();

        let lengths = (0..self.num_edges()).map(|e| self.edge_length(e));
        let (min_edge_length, max_edge_length) =
            lengths.fold((f64::INFINITY, 0.0f64), |(lo, hi), l| (lo.min(l), hi.max(l)));
        let min_triangle_area = (0..self.num_triangles()).map(|t| self.triangle_area(t)).fold(f64::INFINITY, f64::min);
        let max_aspect_ratio =
            (0..self.num_triangles()).map(|t| aspect_ratio(self.triangle_points(t))).fold(0.0, f64::max);

        MeshQuality {
            max_aspect_ratio,
            non_delaunay_edges,
            non_delaunay_edge_ratio: non_delaunay_edges as f64 / self.num_edges() as f64,
            non_delaunay_triangles,
            non_delaunay_triangle_ratio: non_delaunay_triangles as f64 / self.num_triangles() as f64,
            min_edge_length,
            max_edge_length,
            min_triangle_area,
        }
    }
}
