//! Manufactured problems and their per-level error measurements.

use std::f64::consts::PI;

use anyhow::{anyhow, Context, Result};
use dec_core::forms::{
    l2_error, l2_error_piecewise_constant, l2_error_whitney, project_0form, project_1form, FormError, FormField,
    Placement,
};
use dec_core::pde::{
    dual0_operator, one_form_operator, poiseuille_stream_function, poiseuille_velocity, primal0_operator,
    primal0_stiffness, solve_poisson_1form, solve_poisson_dual0, solve_poisson_primal0, NsBoundary, NsSolver,
};
use dec_core::sparse::LinearSystem;
use dec_core::{DualMetrics, Point3, SimplicialComplex2, SparseMatrix};

use crate::config::Study;

/// Pseudo time step for the Poiseuille steady state.
pub const POISEUILLE_DT: f64 = 1.0;
pub const POISEUILLE_VISCOSITY: f64 = 1.0;
pub const STEADY_TOLERANCE: f64 = 1e-10;
pub const MAX_STEADY_STEPS: usize = 200;

pub fn cosine_solution(p: Point3) -> f64 {
    (PI * p.x).cos() * (PI * p.y).cos()
}

pub fn cosine_source(p: Point3) -> f64 {
    -2.0 * PI * PI * cosine_solution(p)
}

/// Vector field vanishing tangentially on the unit square boundary.
pub fn one_form_solution(p: Point3) -> Point3 {
    let (x, y) = (p.x, p.y);
    Point3::new(x * (1.0 - x) * (y * (1.0 - y)).powi(2), y * (1.0 - y) * (x * (1.0 - x)).powi(2), 0.0)
}

/// Componentwise Laplacian of [`one_form_solution`].
pub fn one_form_source(p: Point3) -> Point3 {
    let component = |x: f64, y: f64| {
        let a = x - x * x;
        -2.0 * (y * (1.0 - y)).powi(2) + a * (2.0 - 12.0 * y + 12.0 * y * y)
    };
    Point3::new(component(p.x, p.y), component(p.y, p.x), 0.0)
}

#[derive(Clone, Debug)]
pub struct LevelOutcome {
    /// Error entering the slope fit.
    pub error: f64,
    /// Secondary error measure, reported but not fitted.
    pub alt_error: Option<f64>,
    pub solution: FormField,
    pub time_steps: Option<usize>,
}

fn first_interior_node(m: &SimplicialComplex2) -> Result<usize> {
    (0..m.num_nodes()).find(|&v| !m.is_boundary_node(v)).ok_or_else(|| anyhow!("mesh has no interior node"))
}

/// Drop a secondary error whose signed sum went negative.
fn optional_norm(r: Result<f64, FormError>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(FormError::NegativeNorm(s)) => {
            log::warn!("secondary error has negative signed sum {s:.3e}; left blank");
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn run_level(study: Study, m: &SimplicialComplex2, metrics: &DualMetrics) -> Result<LevelOutcome> {
    match study {
        Study::Poisson0Primal => {
            let f = project_0form(cosine_source, m, metrics, Placement::PrimalNode)?;
            let pin = first_interior_node(m)?;
            let u = solve_poisson_primal0(m, metrics, &f, pin, cosine_solution(m.nodes()[pin]))?;
            let exact = project_0form(cosine_solution, m, metrics, Placement::PrimalNode)?;
            Ok(LevelOutcome {
                error: l2_error(&u, &exact, m, metrics)?,
                alt_error: None,
                solution: u,
                time_steps: None,
            })
        }
        Study::Poisson0Dual => {
            let f = project_0form(cosine_source, m, metrics, Placement::DualNode)?;
            let u = solve_poisson_dual0(m, metrics, &f, 0, cosine_solution(metrics.circumcenters[0]))?;
            let at_circumcenters = project_0form(cosine_solution, m, metrics, Placement::DualNode)?;
            Ok(LevelOutcome {
                error: l2_error_piecewise_constant(&u, cosine_solution, m)?,
                alt_error: optional_norm(l2_error(&u, &at_circumcenters, m, metrics))?,
                solution: u,
                time_steps: None,
            })
        }
        Study::Poisson1 => {
            let f = project_1form(one_form_source, m);
            let zeros = vec![0.0; m.boundary_edges().len()];
            let u = solve_poisson_1form(m, metrics, &f, &zeros, None)?;
            let exact = project_1form(one_form_solution, m);
            Ok(LevelOutcome {
                error: l2_error_whitney(&u, one_form_solution, m)?,
                alt_error: optional_norm(l2_error(&u, &exact, m, metrics))?,
                solution: u,
                time_steps: None,
            })
        }
        Study::NsPoiseuille => poiseuille_level(m, metrics),
        Study::NsShearCurved => Err(anyhow!("the shear layer has no convergence study; use `dec shear`")),
    }
}

fn poiseuille_level(m: &SimplicialComplex2, metrics: &DualMetrics) -> Result<LevelOutcome> {
    let psi: Vec<f64> = m.nodes().iter().map(|&p| poiseuille_stream_function(p)).collect();
    let bc = NsBoundary::Dirichlet { psi: psi.clone(), tangential: vec![0.0; m.boundary_edges().len()] };
    let solver = NsSolver::new(m, metrics, bc)?;
    let mut state = solver.state_from_psi(psi.clone(), 0.0, POISEUILLE_DT, POISEUILLE_VISCOSITY)?;
    let mut steps = 0;
    loop {
        let next = solver.step(&state)?;
        steps += 1;
        let change = next.psi.values.iter().zip(&state.psi.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        state = next;
        if change / POISEUILLE_DT < STEADY_TOLERANCE {
            break;
        }
        if steps == MAX_STEADY_STEPS {
            return Err(anyhow!("no steady state after {steps} steps (last change {change:.3e})"));
        }
    }
    let exact_flux = FormField { values: m.d0().spmv(&psi)?, placement: Placement::PrimalEdge };
    let exact_velocity = project_1form(poiseuille_velocity, m);
    Ok(LevelOutcome {
        error: l2_error(&solver.flux(&state)?, &exact_flux, m, metrics).context("flux error")?,
        alt_error: optional_norm(l2_error(&state.v_primal, &exact_velocity, m, metrics))?,
        solution: state.psi,
        time_steps: Some(steps),
    })
}

/// Matrices whose conditioning is reported for a study, with their labels.
/// Neumann problems are pinned the same way as in the solve.
pub fn stiffness_matrices(
    study: Study,
    m: &SimplicialComplex2,
    metrics: &DualMetrics,
) -> Result<Vec<(&'static str, SparseMatrix)>> {
    let pinned = |a: SparseMatrix, pin: usize| -> Result<SparseMatrix> {
        let n = a.nrows();
        Ok(LinearSystem::new(a, vec![0.0; n]).with_pin(pin, 0.0).pinned_parts()?.0)
    };
    match study {
        Study::Poisson0Primal => {
            let pin = first_interior_node(m)?;
            Ok(vec![
                ("eq3", pinned(primal0_operator(m, metrics)?, pin)?),
                ("star0_scaled", pinned(primal0_stiffness(m, metrics), pin)?),
            ])
        }
        Study::Poisson0Dual => Ok(vec![("dual0", pinned(dual0_operator(m, metrics)?, 0)?)]),
        Study::Poisson1 => {
            let interior: Vec<usize> = m.interior_edges().collect();
            Ok(vec![("one_form_interior", one_form_operator(m, metrics)?.submatrix(&interior, &interior))])
        }
        Study::NsPoiseuille => {
            let free: Vec<usize> = (0..m.num_nodes()).filter(|&v| !m.is_boundary_node(v)).collect();
            Ok(vec![("stream_laplacian", primal0_stiffness(m, metrics).submatrix(&free, &free))])
        }
        Study::NsShearCurved => Err(anyhow!("no stiffness matrix study for the shear layer")),
    }
}
