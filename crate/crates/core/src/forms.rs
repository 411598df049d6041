//! Discrete k-forms, projections of analytic fields and discrete L² norms.

use std::fmt;

use thiserror::Error;

use crate::dual::DualMetrics;
use crate::mesh::SimplicialComplex2;
use crate::Point3;

/// Where the degrees of freedom of a form live.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Placement {
    PrimalNode,
    PrimalEdge,
    Triangle,
    /// Circumcenters, one per triangle.
    DualNode,
    /// Dual edges, one per primal edge.
    DualEdge,
    /// Dual cells, one per primal node.
    DualCell,
}

impl Placement {
    pub fn degree(self) -> usize {
        match self {
            Placement::PrimalNode | Placement::DualNode => 0,
            Placement::PrimalEdge | Placement::DualEdge => 1,
            Placement::Triangle | Placement::DualCell => 2,
        }
    }

    pub fn entity_count(self, m: &SimplicialComplex2) -> usize {
        match self {
            Placement::PrimalNode | Placement::DualCell => m.num_nodes(),
            Placement::PrimalEdge | Placement::DualEdge => m.num_edges(),
            Placement::Triangle | Placement::DualNode => m.num_triangles(),
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Placement::PrimalNode => "primal_node",
            Placement::PrimalEdge => "primal_edge",
            Placement::Triangle => "triangle",
            Placement::DualNode => "dual_node",
            Placement::DualEdge => "dual_edge",
            Placement::DualCell => "dual_cell",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("expected a form on {expected}, found one on {found}")]
    PlacementMismatch { expected: Placement, found: Placement },
    #[error("a form on {placement} needs {expected} values, found {found}")]
    LengthMismatch { placement: Placement, expected: usize, found: usize },
    #[error("operation is not defined for forms on {0}")]
    Unsupported(Placement),
    #[error("signed quadrature weights produced a negative squared norm {0:.3e}")]
    NegativeNorm(f64),
}

/// Values of a discrete form together with their placement.
#[derive(Clone, Debug, PartialEq)]
pub struct FormField {
    pub values: Vec<f64>,
    pub placement: Placement,
}

impl FormField {
    pub fn new(values: Vec<f64>, placement: Placement, m: &SimplicialComplex2) -> Result<Self, FormError> {
        let expected = placement.entity_count(m);
        if values.len() != expected {
            return Err(FormError::LengthMismatch { placement, expected, found: values.len() });
        }
        Ok(Self { values, placement })
    }

    pub fn zeros(placement: Placement, m: &SimplicialComplex2) -> Self {
        Self { values: vec![0.0; placement.entity_count(m)], placement }
    }

    pub fn degree(&self) -> usize {
        self.placement.degree()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn expect(&self, placement: Placement) -> Result<&[f64], FormError> {
        if self.placement != placement {
            return Err(FormError::PlacementMismatch { expected: placement, found: self.placement });
        }
        Ok(&self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// CSV rows `index,value`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{i},{v:.16e}")?;
        }
        Ok(())
    }
}

/// Pointwise evaluation at primal nodes or at circumcenters.
pub fn project_0form(
    f: impl Fn(Point3) -> f64,
    m: &SimplicialComplex2,
    metrics: &DualMetrics,
    placement: Placement,
) -> Result<FormField, FormError> {
    let values = match placement {
        Placement::PrimalNode => m.nodes().iter().map(|&p| f(p)).collect(),
        Placement::DualNode => metrics.circumcenters.iter().map(|&c| f(c)).collect(),
        other => return Err(FormError::Unsupported(other)),
    };
    Ok(FormField { values, placement })
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Line integral of `field · t` along the straight segment `a → b` by
/// 5-point Gauss–Legendre quadrature.
pub fn line_integral(field: &impl Fn(Point3) -> Point3, a: Point3, b: Point3) -> f64 {
    let d = b - a;
    let mid = 0.5 * (a + b);
    0.5 * GAUSS5.iter().map(|&(x, w)| w * field(mid + 0.5 * x * d).dot(&d)).sum::<f64>()
}

/// Primal 1-form: integral of the tangential component along each canonical edge.
pub fn project_1form(field: impl Fn(Point3) -> Point3, m: &SimplicialComplex2) -> FormField {
    let values = (0..m.num_edges())
        .map(|e| {
            let (a, b) = m.edge_endpoints(e);
            line_integral(&field, a, b)
        })
        .collect();
    FormField { values, placement: Placement::PrimalEdge }
}

/// Dual 1-form of a field taken constant on each triangle (its value at the
/// centroid), integrated along the two half dual edges from the edge midpoint
/// to the circumcenters. The dual edge of `[a, b]` is oriented a quarter turn
/// counterclockwise from `a → b`.
pub fn project_dual_1form(
    field: impl Fn(Point3) -> Point3,
    m: &SimplicialComplex2,
    metrics: &DualMetrics,
) -> FormField {
    let mut values = vec![0.0; m.num_edges()];
    for t in 0..m.num_triangles() {
        let p = m.triangle_points(t);
        let v = field((p[0] + p[1] + p[2]) / 3.0);
        let c = metrics.circumcenters[t];
        let edges = m.triangle_edges(t);
        let signs = m.triangle_edge_signs(t);
        for k in 0..3 {
            let mid = 0.5 * (p[k] + p[(k + 1) % 3]);
            values[edges[k]] += f64::from(signs[k]) * v.dot(&(c - mid));
        }
    }
    FormField { values, placement: Placement::DualEdge }
}

/// Discrete L² norm of `numerical − exact`.
///
/// Primal node 0-forms are weighted by signed dual cell areas, circumcenter
/// 0-forms by triangle areas, and primal edge 1-forms use
/// `Σ A_s ((Δu)/|σ¹|)²` with signed support areas `A_s`.
pub fn l2_error(
    numerical: &FormField,
    exact: &FormField,
    m: &SimplicialComplex2,
    metrics: &DualMetrics,
) -> Result<f64, FormError> {
    if numerical.placement != exact.placement {
        return Err(FormError::PlacementMismatch { expected: exact.placement, found: numerical.placement });
    }
    for f in [numerical, exact] {
        let expected = f.placement.entity_count(m);
        if f.values.len() != expected {
            return Err(FormError::LengthMismatch { placement: f.placement, expected, found: f.values.len() });
        }
    }
    let diff = numerical.values.iter().zip(&exact.values).map(|(a, b)| a - b);
    let sum: f64 = match numerical.placement {
        Placement::PrimalNode => diff.zip(&metrics.dual_cell_area).map(|(d, w)| w * d * d).sum(),
        Placement::DualNode => diff.zip(&metrics.triangle_area).map(|(d, w)| w * d * d).sum(),
        Placement::PrimalEdge => diff
            .zip(metrics.support_area.iter().zip(&metrics.primal_edge_length))
            .map(|(d, (a, l))| a * (d / l) * (d / l))
            .sum(),
        other => return Err(FormError::Unsupported(other)),
    };
    if sum < 0.0 {
        return Err(FormError::NegativeNorm(sum));
    }
    Ok(sum.sqrt())
}

/// Seven-point degree-5 triangle rule: barycentric `(a, b, b)` orbits and weights.
const TRIANGLE7: [(f64, f64, f64); 3] = [
    (1.0 / 3.0, 1.0 / 3.0, 0.225),
    (0.059_715_871_789_769_82, 0.470_142_064_105_115_1, 0.132_394_152_788_506_2),
    (0.797_426_985_353_087_3, 0.101_286_507_323_456_3, 0.125_939_180_544_827_1),
];

/// Continuous L² distance between a field held constant on each triangle (a
/// circumcenter or triangle form) and an analytic function, integrated with a
/// degree-5 rule on every triangle.
pub fn l2_error_piecewise_constant(
    numerical: &FormField,
    exact: impl Fn(Point3) -> f64,
    m: &SimplicialComplex2,
) -> Result<f64, FormError> {
    if !matches!(numerical.placement, Placement::DualNode | Placement::Triangle) {
        return Err(FormError::Unsupported(numerical.placement));
    }
    if numerical.values.len() != m.num_triangles() {
        return Err(FormError::LengthMismatch {
            placement: numerical.placement,
            expected: m.num_triangles(),
            found: numerical.values.len(),
        });
    }
    let mut sum = 0.0;
    for (t, &u) in numerical.values.iter().enumerate() {
        let p = m.triangle_points(t);
        let mut acc = 0.0;
        for &(a, b, w) in &TRIANGLE7 {
            let orbit: &[[f64; 3]] = if a == b { &[[a, a, a]] } else { &[[a, b, b], [b, a, b], [b, b, a]] };
            for l in orbit {
                let q = l[0] * p[0] + l[1] * p[1] + l[2] * p[2];
                acc += w * (exact(q) - u).powi(2);
            }
        }
        sum += m.triangle_area(t) * acc;
    }
    Ok(sum.sqrt())
}

/// Continuous L² distance between the Whitney interpolant of a primal
/// 1-form and an analytic vector field, integrated with a degree-5 rule.
///
/// In a triangle with corners `p₀, p₁, p₂` the side `k → k+1` carries the
/// basis field `λ_k ∇λ_{k+1} − λ_{k+1} ∇λ_k`, and only the tangential part of
/// the exact field is compared.
pub fn l2_error_whitney(
    numerical: &FormField,
    exact: impl Fn(Point3) -> Point3,
    m: &SimplicialComplex2,
) -> Result<f64, FormError> {
    let u = numerical.expect(Placement::PrimalEdge)?;
    if u.len() != m.num_edges() {
        return Err(FormError::LengthMismatch {
            placement: Placement::PrimalEdge,
            expected: m.num_edges(),
            found: u.len(),
        });
    }
    let mut sum = 0.0;
    for t in 0..m.num_triangles() {
        let p = m.triangle_points(t);
        let cross = (p[1] - p[0]).cross(&(p[2] - p[0]));
        let area2 = cross.norm();
        let normal = cross / area2;
        let grad: [Point3; 3] = std::array::from_fn(|i| normal.cross(&(p[(i + 2) % 3] - p[(i + 1) % 3])) / area2);
        let edges = m.triangle_edges(t);
        let signs = m.triangle_edge_signs(t);
        let coef: [f64; 3] = std::array::from_fn(|k| f64::from(signs[k]) * u[edges[k]]);
        let mut acc = 0.0;
        for &(a, b, w) in &TRIANGLE7 {
            let orbit: &[[f64; 3]] = if a == b { &[[a, a, a]] } else { &[[a, b, b], [b, a, b], [b, b, a]] };
            for l in orbit {
                let q = l[0] * p[0] + l[1] * p[1] + l[2] * p[2];
                let mut uh = Point3::zeros();
                for k in 0..3 {
                    let j = (k + 1) % 3;
                    uh += coef[k] * (l[k] * grad[j] - l[j] * grad[k]);
                }
                let f = exact(q);
                let diff = f - f.dot(&normal) * normal - uh;
                acc += w * diff.norm_squared();
            }
        }
        sum += 0.5 * area2 * acc;
    }
    Ok(sum.sqrt())
}
