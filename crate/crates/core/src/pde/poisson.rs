use super::{reciprocals_on, PdeError};
use crate::dual::{boundary_closure_matrix, DualMetrics};
use crate::forms::{FormField, Placement};
use crate::mesh::SimplicialComplex2;
use crate::sparse::{solve, LinearSystem, SparseMatrix};

/// `(−d₀ᵀ) ∗₁ d₀`, the symmetric node-to-node stiffness matrix.
pub fn primal0_stiffness(m: &SimplicialComplex2, metrics: &DualMetrics) -> SparseMatrix {
    let d0 = m.d0();
    let star1_d0 = d0.scale_rows(&metrics.star1).expect("star1 has one entry per edge");
    d0.transpose().spmm(&star1_d0).expect("d0ᵀ and d0 conform").scale(-1.0)
}

/// `∗₀⁻¹ (−d₀ᵀ) ∗₁ d₀`.
pub fn primal0_operator(m: &SimplicialComplex2, metrics: &DualMetrics) -> Result<SparseMatrix, PdeError> {
    let star0_inv = metrics.star0_inv()?;
    Ok(primal0_stiffness(m, metrics).scale_rows(&star0_inv)?)
}

fn check_len(f: &FormField, placement: Placement, m: &SimplicialComplex2) -> Result<(), PdeError> {
    f.expect(placement)?;
    FormField::new(f.values.clone(), placement, m)?;
    Ok(())
}

/// `f` minus its weighted mean, so that a pure Neumann problem is solvable.
/// Left alone, the mismatch would land on the pinned row as a point source.
fn compatible(f: &[f64], weights: &[f64]) -> Vec<f64> {
    let mean = f.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / weights.iter().sum::<f64>();
    f.iter().map(|v| v - mean).collect()
}

/// Primal 0-form Poisson problem with homogeneous Neumann data. The unknown at
/// `pin_node` is fixed to `pin_value`, which removes the constant mode, and `f`
/// is shifted by its `∗₀`-weighted mean first.
pub fn solve_poisson_primal0(
    m: &SimplicialComplex2,
    metrics: &DualMetrics,
    f: &FormField,
    pin_node: usize,
    pin_value: f64,
) -> Result<FormField, PdeError> {
    check_len(f, Placement::PrimalNode, m)?;
    let a = primal0_operator(m, metrics)?;
    let rhs = compatible(&f.values, &metrics.star0);
    let u = solve(&LinearSystem::new(a, rhs).with_pin(pin_node, pin_value))?;
    Ok(FormField { values: u, placement: Placement::PrimalNode })
}

/// The same problem multiplied through by `∗₀`: `(−d₀ᵀ) ∗₁ d₀ u = ∗₀ f`.
pub fn solve_poisson_primal0_scaled(
    m: &SimplicialComplex2,
    metrics: &DualMetrics,
    f: &FormField,
    pin_node: usize,
    pin_value: f64,
) -> Result<FormField, PdeError> {
    check_len(f, Placement::PrimalNode, m)?;
    let a = primal0_stiffness(m, metrics);
    let rhs = compatible(&f.values, &metrics.star0).iter().zip(&metrics.star0).map(|(v, s)| v * s).collect();
    let u = solve(&LinearSystem::new(a, rhs).with_pin(pin_node, pin_value))?;
    Ok(FormField { values: u, placement: Placement::PrimalNode })
}

fn interior_edge_mask(m: &SimplicialComplex2) -> Vec<bool> {
    (0..m.num_edges()).map(|e| !m.is_boundary_edge(e)).collect()
}

/// `∗₂ d₁′ ∗₁⁻¹ d₁ᵀ` on circumcenter values, where `d₁′` keeps only the
/// interior-edge columns of `d₁`.
///
/// A primal 1-form reached from a dual 1-form picks up the sign of `∗∗ = −1`,
/// so the inverse star enters as `−1/∗₁`. Only interior dual edges are inverted.
pub fn dual0_operator(m: &SimplicialComplex2, metrics: &DualMetrics) -> Result<SparseMatrix, PdeError> {
    let keep = interior_edge_mask(m);
    let inv = reciprocals_on("dual edge of edge", &metrics.dual_edge_length, &metrics.star1, m.interior_edges())?;
    let neg_inv: Vec<f64> = inv.iter().map(|v| -v).collect();
    let d1p = m.d1().mask_cols(&keep);
    let a = d1p.scale_cols(&neg_inv)?.spmm(&d1p.transpose())?;
    Ok(a.scale_rows(&metrics.star2)?)
}

/// Dual 0-form Poisson problem on circumcenter values with the unknown of
/// `pin_cell` fixed to `pin_value`; `f` is shifted by its area-weighted mean.
pub fn solve_poisson_dual0(
    m: &SimplicialComplex2,
    metrics: &DualMetrics,
    f: &FormField,
    pin_cell: usize,
    pin_value: f64,
) -> Result<FormField, PdeError> {
    check_len(f, Placement::DualNode, m)?;
    let a = dual0_operator(m, metrics)?;
    let rhs = compatible(&f.values, &metrics.triangle_area);
    let u = solve(&LinearSystem::new(a, rhs).with_pin(pin_cell, pin_value))?;
    Ok(FormField { values: u, placement: Placement::DualNode })
}

/// `d₀ ∗₀⁻¹ (−d₀ᵀ) ∗₁ − ∗₁⁻¹ d₁ᵀ ∗₂ d₁` acting on primal 1-forms, with the
/// inverse star in the second term again carrying `∗∗ = −1`.
///
/// Rows of boundary edges hold only the first term. They are eliminated by
/// the Dirichlet data anyway, and boundary dual edges may have zero length.
pub fn one_form_operator(m: &SimplicialComplex2, metrics: &DualMetrics) -> Result<SparseMatrix, PdeError> {
    let (d0, d1) = m.exterior_derivative_matrices();
    let star0_inv = metrics.star0_inv()?;
    let inv = reciprocals_on("dual edge of edge", &metrics.dual_edge_length, &metrics.star1, m.interior_edges())?;

    let grad_div = d0.scale_cols(&star0_inv)?.spmm(&d0.transpose().scale_cols(&metrics.star1)?)?.scale(-1.0);
    let curl_curl = d1.transpose().scale_cols(&metrics.star2)?.spmm(&d1)?.scale_rows(&inv)?;
    Ok(grad_div.add_scaled(1.0, &curl_curl, -1.0)?)
}

/// 1-form Poisson problem with Dirichlet data.
///
/// `g` holds the prescribed 1-form values on the boundary edges and `h`, when
/// given, the boundary data closing the dual cells of boundary nodes, both in
/// the order of `m.boundary_edges()`. Boundary unknowns are moved to the
/// right-hand side and their rows and columns removed before solving.
pub fn solve_poisson_1form(
    m: &SimplicialComplex2,
    metrics: &DualMetrics,
    f: &FormField,
    g: &[f64],
    h: Option<&[f64]>,
) -> Result<FormField, PdeError> {
    check_len(f, Placement::PrimalEdge, m)?;
    let boundary = m.boundary_edges();
    if g.len() != boundary.len() || h.is_some_and(|h| h.len() != boundary.len()) {
        return Err(PdeError::InvalidInput(format!("boundary data must have {} entries", boundary.len())));
    }
    let a = one_form_operator(m, metrics)?;
    let mut rhs = f.values.clone();
    if let Some(h) = h {
        let star0_inv = metrics.star0_inv()?;
        let closed = boundary_closure_matrix(m).spmv(h)?;
        let scaled: Vec<f64> = closed.iter().zip(&star0_inv).map(|(c, s)| c * s).collect();
        for (r, c) in rhs.iter_mut().zip(m.d0().spmv(&scaled)?) {
            *r -= c;
        }
    }
    let mut u = vec![0.0; m.num_edges()];
    for (&e, &v) in boundary.iter().zip(g) {
        u[e] = v;
    }
    let interior: Vec<usize> = m.interior_edges().collect();
    let coupling = a.submatrix(&interior, boundary).spmv(g)?;
    let reduced_rhs: Vec<f64> = interior.iter().zip(&coupling).map(|(&e, c)| rhs[e] - c).collect();
    let x = solve(&LinearSystem::new(a.submatrix(&interior, &interior), reduced_rhs))?;
    for (&e, v) in interior.iter().zip(x) {
        u[e] = v;
    }
    Ok(FormField { values: u, placement: Placement::PrimalEdge })
}
