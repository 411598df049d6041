//! Stream-function form of the incompressible Navier–Stokes equations.
//!
//! Velocity is the rotated gradient `(−∂ψ/∂y, ∂ψ/∂x)`, so `d₀ψ` is the flux
//! through each primal edge towards the side a quarter turn counterclockwise
//! from the edge, and `u = ∗₁d₀ψ` is the circulation along the dual edges.

use super::PdeError;
use crate::dual::{boundary_closure_matrix, DualMetrics};
use crate::forms::{FormField, Placement};
use crate::mesh::SimplicialComplex2;
use crate::sparse::{solve, LinearSystem, SparseMatrix};
use crate::Point3;

/// Shear thickness of the double shear layer.
pub const SHEAR_LAYER_RHO: f64 = 1.0 / 30.0;

/// Double shear layer: `u_x = tanh((y − 0.25)/ρ)` below `y = 0.5` and
/// `tanh((0.75 − y)/ρ)` above, at rest otherwise.
pub fn shear_layer_velocity(p: Point3) -> Point3 {
    let ux = if p.y <= 0.5 { ((p.y - 0.25) / SHEAR_LAYER_RHO).tanh() } else { ((0.75 - p.y) / SHEAR_LAYER_RHO).tanh() };
    Point3::new(ux, 0.0, 0.0)
}

/// Channel flow `(y(1 − y), 0)` on the unit square.
pub fn poiseuille_velocity(p: Point3) -> Point3 {
    Point3::new(p.y * (1.0 - p.y), 0.0, 0.0)
}

/// Stream function of [`poiseuille_velocity`] under the rotated-gradient convention.
pub fn poiseuille_stream_function(p: Point3) -> f64 {
    p.y.powi(3) / 3.0 - p.y * p.y / 2.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct NSState {
    /// Stream function on primal nodes.
    pub psi: FormField,
    /// `∗₁ d₀ ψ` on dual edges.
    pub u_dual: FormField,
    /// Tangential velocity integrated along primal edges.
    pub v_primal: FormField,
    pub time: f64,
    pub dt: f64,
    pub nu: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NsBoundary {
    /// Closed surface; `ψ` at `pin_node` keeps its current value.
    Periodic { pin_node: usize },
    /// `psi` gives ψ for every node (only boundary entries are used) and
    /// `tangential` the tangential 1-form on each boundary edge in the order of
    /// `m.boundary_edges()`.
    Dirichlet { psi: Vec<f64>, tangential: Vec<f64> },
}

/// Per-triangle tangent vectors recovered from edge fluxes.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub v_primal: FormField,
    pub triangle_velocity: Vec<Point3>,
    /// Largest least-squares residual over all triangles.
    pub max_residual: f64,
}

/// Tangential primal 1-form from edge fluxes.
///
/// `flux` is either the primal flux 1-form `d₀ψ` or the dual 1-form `∗₁d₀ψ`,
/// which is converted back through `1/∗₁`. In each triangle the constant tangent
/// vector whose fluxes across the three sides match best in the least-squares
/// sense is found. An edge value averages the vectors of its triangles dotted
/// with the edge vector.
pub fn reconstruct_tangential_1form(
    m: &SimplicialComplex2,
    metrics: &DualMetrics,
    flux: &FormField,
) -> Result<Reconstruction, PdeError> {
    let fluxes = match flux.placement {
        Placement::PrimalEdge => flux.values.clone(),
        Placement::DualEdge => {
            let inv = metrics.star1_inv()?;
            flux.values.iter().zip(&inv).map(|(u, s)| u * s).collect()
        }
        other => return Err(crate::forms::FormError::Unsupported(other).into()),
    };
    if fluxes.len() != m.num_edges() {
        return Err(PdeError::InvalidInput(format!("expected {} edge values, found {}", m.num_edges(), fluxes.len())));
    }

    let mut triangle_velocity = Vec::with_capacity(m.num_triangles());
    let mut sums = vec![0.0; m.num_edges()];
    let mut counts = vec![0u8; m.num_edges()];
    let mut max_residual: f64 = 0.0;
    for t in 0..m.num_triangles() {
        let p = m.triangle_points(t);
        let normal = (p[1] - p[0]).cross(&(p[2] - p[0])).normalize();
        let e1 = (p[1] - p[0]).normalize();
        let e2 = normal.cross(&e1);
        let edges = m.triangle_edges(t);
        let signs = m.triangle_edge_signs(t);

        let mut rows = [[0.0; 2]; 3];
        let mut rhs = [0.0; 3];
        for k in 0..3 {
            let side = p[(k + 1) % 3] - p[k];
            let across = normal.cross(&side);
            rows[k] = [across.dot(&e1), across.dot(&e2)];
            rhs[k] = f64::from(signs[k]) * fluxes[edges[k]];
        }
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for k in 0..3 {
            a11 += rows[k][0] * rows[k][0];
            a12 += rows[k][0] * rows[k][1];
            a22 += rows[k][1] * rows[k][1];
            b1 += rows[k][0] * rhs[k];
            b2 += rows[k][1] * rhs[k];
        }
        let det = a11 * a22 - a12 * a12;
        if det.is_nan() || det <= 1e-14 * (a11 * a22).max(f64::MIN_POSITIVE) {
            return Err(PdeError::RankDeficient { triangle: t });
        }
        let w1 = (a22 * b1 - a12 * b2) / det;
        let w2 = (a11 * b2 - a12 * b1) / det;
        let residual = (0..3).map(|k| (rows[k][0] * w1 + rows[k][1] * w2 - rhs[k]).powi(2)).sum::<f64>().sqrt();
        max_residual = max_residual.max(residual);
        let w = w1 * e1 + w2 * e2;
        for k in 0..3 {
            let side = f64::from(signs[k]) * (p[(k + 1) % 3] - p[k]);
            sums[edges[k]] += w.dot(&side);
            counts[edges[k]] += 1;
        }
        triangle_velocity.push(w);
    }
    let values = sums.iter().zip(&counts).map(|(s, &c)| s / f64::from(c.max(1))).collect();
    Ok(Reconstruction {
        v_primal: FormField { values, placement: Placement::PrimalEdge },
        triangle_velocity,
        max_residual,
    })
}

/// `ω = ∗₀⁻¹ (−d₀ᵀ) u` on primal nodes. Dual cells of boundary nodes are left
/// open; see [`NsSolver::vorticity`] for the closed version.
pub fn vorticity(m: &SimplicialComplex2, metrics: &DualMetrics, u_dual: &FormField) -> Result<FormField, PdeError> {
    let u = u_dual.expect(Placement::DualEdge)?;
    let star0_inv = metrics.star0_inv()?;
    let circ = m.d0().transpose().spmv(u)?;
    let values = circ.iter().zip(&star0_inv).map(|(c, s)| -c * s).collect();
    Ok(FormField { values, placement: Placement::PrimalNode })
}

/// `Σ (−d₀ᵀ u)`, the sum of all dual-cell circulations.
pub fn total_circulation(m: &SimplicialComplex2, u_dual: &FormField) -> Result<f64, PdeError> {
    let u = u_dual.expect(Placement::DualEdge)?;
    Ok(-m.d0().transpose().spmv(u)?.iter().sum::<f64>())
}

/// Operators of the stepper that do not change between steps.
pub struct NsSolver<'a> {
    m: &'a SimplicialComplex2,
    metrics: &'a DualMetrics,
    bc: NsBoundary,
    d0: SparseMatrix,
    /// `(−d₀ᵀ) ∗₁`
    g: SparseMatrix,
    /// `(−d₀ᵀ) ∗₁ d₀`
    l: SparseMatrix,
    star0_inv: Vec<f64>,
    /// `∗₀⁻¹ (−d₀ᵀ) ∗₁ d₀`
    dl: SparseMatrix,
    /// `L ∗₀⁻¹ L`
    ldl: SparseMatrix,
    /// `∗₀⁻¹ d_b v` from the boundary tangential data.
    boundary_vorticity: Vec<f64>,
    free: Vec<usize>,
    fixed: Vec<usize>,
    min_edge_length: f64,
}

impl<'a> NsSolver<'a> {
    pub fn new(m: &'a SimplicialComplex2, metrics: &'a DualMetrics, bc: NsBoundary) -> Result<Self, PdeError> {
        let d0 = m.d0();
        let star0_inv = metrics.star0_inv()?;
        let g = d0.transpose().scale_cols(&metrics.star1)?.scale(-1.0);
        let l = g.spmm(&d0)?;
        let dl = l.scale_rows(&star0_inv)?;
        let ldl = l.spmm(&dl)?;
        let n = m.num_nodes();
        let (free, fixed, boundary_vorticity) = match &bc {
            NsBoundary::Periodic { pin_node } => {
                if !m.boundary_edges().is_empty() {
                    return Err(PdeError::InvalidInput("periodic boundary conditions need a closed mesh".into()));
                }
                if *pin_node >= n {
                    return Err(PdeError::InvalidInput(format!("pin node {pin_node} out of range")));
                }
                ((0..n).collect(), Vec::new(), vec![0.0; n])
            }
            NsBoundary::Dirichlet { psi, tangential } => {
                if psi.len() != n || tangential.len() != m.boundary_edges().len() {
                    return Err(PdeError::InvalidInput("boundary data has the wrong length".into()));
                }
                let closed = boundary_closure_matrix(m).spmv(tangential)?;
                let bv = closed.iter().zip(&star0_inv).map(|(c, s)| c * s).collect();
                let free = (0..n).filter(|&v| !m.is_boundary_node(v)).collect();
                (free, m.boundary_nodes().to_vec(), bv)
            }
        };
        let min_edge_length = metrics.primal_edge_length.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        Ok(Self { m, metrics, bc, d0, g, l, star0_inv, dl, ldl, boundary_vorticity, free, fixed, min_edge_length })
    }

    /// State for a given stream function; ψ on Dirichlet nodes is overwritten.
    pub fn state_from_psi(&self, mut psi: Vec<f64>, time: f64, dt: f64, nu: f64) -> Result<NSState, PdeError> {
        if psi.len() != self.m.num_nodes() {
            return Err(PdeError::InvalidInput("ψ needs one value per node".into()));
        }
        if let NsBoundary::Dirichlet { psi: bpsi, .. } = &self.bc {
            for &v in &self.fixed {
                psi[v] = bpsi[v];
            }
        }
        let flux = self.d0.spmv(&psi)?;
        let u = flux.iter().zip(&self.metrics.star1).map(|(f, s)| f * s).collect();
        let v = self.tangential(&flux)?;
        Ok(NSState {
            psi: FormField { values: psi, placement: Placement::PrimalNode },
            u_dual: FormField { values: u, placement: Placement::DualEdge },
            v_primal: v,
            time,
            dt,
            nu,
        })
    }

    fn tangential(&self, flux: &[f64]) -> Result<FormField, PdeError> {
        let flux = FormField { values: flux.to_vec(), placement: Placement::PrimalEdge };
        let mut v = reconstruct_tangential_1form(self.m, self.metrics, &flux)?.v_primal;
        if let NsBoundary::Dirichlet { tangential, .. } = &self.bc {
            for (&e, &t) in self.m.boundary_edges().iter().zip(tangential) {
                v.values[e] = t;
            }
        }
        Ok(v)
    }

    /// Primal flux 1-form `d₀ψ`.
    pub fn flux(&self, state: &NSState) -> Result<FormField, PdeError> {
        Ok(FormField { values: self.d0.spmv(&state.psi.values)?, placement: Placement::PrimalEdge })
    }

    /// Vorticity with the dual cells of boundary nodes closed by the boundary
    /// tangential data.
    pub fn vorticity(&self, state: &NSState) -> Result<FormField, PdeError> {
        let lpsi = self.dl.spmv(&state.psi.values)?;
        let values = lpsi.iter().zip(&self.boundary_vorticity).map(|(a, b)| a + b).collect();
        Ok(FormField { values, placement: Placement::PrimalNode })
    }

    /// Largest triangle speed times `dt` over the shortest primal edge.
    pub fn cfl_number(&self, state: &NSState) -> Result<f64, PdeError> {
        let flux = self.flux(state)?;
        let r = reconstruct_tangential_1form(self.m, self.metrics, &flux)?;
        let speed = r.triangle_velocity.iter().fold(0.0f64, |a, w| a.max(w.norm()));
        Ok(speed * state.dt / self.min_edge_length)
    }

    /// One backward-Euler step with the advecting velocity lagged at the old level.
    pub fn step(&self, state: &NSState) -> Result<NSState, PdeError> {
        let cfl = self.cfl_number(state)?;
        if cfl > 1.0 {
            log::warn!("CFL number {cfl:.3} exceeds 1 at t = {:.4}", state.time);
        }
        let (dt, nu) = (state.dt, state.nu);
        let w = self.wedge_matrix(&state.v_primal.values);
        let gw = self.g.spmm(&w)?;
        let advect = gw.spmm(&self.dl)?;
        let a = self.l.add_scaled(1.0 / dt, &self.ldl, -nu)?.add_scaled(1.0, &advect, 1.0)?;

        let mut rhs: Vec<f64> = self.l.spmv(&state.psi.values)?.iter().map(|v| v / dt).collect();
        if self.boundary_vorticity.iter().any(|&b| b != 0.0) {
            let viscous = self.l.spmv(&self.boundary_vorticity)?;
            let adv = gw.spmv(&self.boundary_vorticity)?;
            for i in 0..rhs.len() {
                rhs[i] += nu * viscous[i] - adv[i];
            }
        }

        let psi = match &self.bc {
            NsBoundary::Periodic { pin_node } => {
                solve(&LinearSystem::new(a, rhs).with_pin(*pin_node, state.psi.values[*pin_node]))?
            }
            NsBoundary::Dirichlet { psi: bpsi, .. } => {
                let fixed_values: Vec<f64> = self.fixed.iter().map(|&v| bpsi[v]).collect();
                let coupling = a.submatrix(&self.free, &self.fixed).spmv(&fixed_values)?;
                let reduced: Vec<f64> = self.free.iter().zip(&coupling).map(|(&v, c)| rhs[v] - c).collect();
                let x = solve(&LinearSystem::new(a.submatrix(&self.free, &self.free), reduced))?;
                let mut psi = bpsi.clone();
                for (&v, xv) in self.free.iter().zip(x) {
                    psi[v] = xv;
                }
                psi
            }
        };
        self.state_from_psi(psi, state.time + dt, dt, nu)
    }

    /// `W_v`: `(W_v ω)[e] = v_e (ω_a + ω_b)/2` for `e = [a, b]`.
    fn wedge_matrix(&self, v: &[f64]) -> SparseMatrix {
        let triplets: Vec<(usize, usize, f64)> = self
            .m
            .edges()
            .iter()
            .zip(v)
            .flat_map(|(&[a, b], &ve)| [(a, 0.5 * ve), (b, 0.5 * ve)])
            .enumerate()
            .map(|(k, (node, w))| (k / 2, node, w))
            .collect();
        SparseMatrix::from_triplets(self.m.num_edges(), self.m.num_nodes(), &triplets)
    }

    pub fn star0_inv(&self) -> &[f64] {
        &self.star0_inv
    }
}

/// One step from scratch; builds the constant operators on every call.
pub fn ns_step(
    state: &NSState,
    m: &SimplicialComplex2,
    metrics: &DualMetrics,
    bc: &NsBoundary,
) -> Result<NSState, PdeError> {
    NsSolver::new(m, metrics, bc.clone())?.step(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{project_1form, project_dual_1form};
    use crate::mesh_gen::{delaunay_unit_square, lift_sinusoidal, periodic_identify, structured_grid};

    #[test]
    fn uniform_flow_is_reconstructed_exactly() {
        let m = delaunay_unit_square(128, 5).unwrap();
        let d = DualMetrics::new(&m).unwrap();
        // ψ = y gives velocity (−1, 0)
        let psi: Vec<f64> = m.nodes().iter().map(|p| -p.y).collect();
        let flux = FormField { values: m.d0().spmv(&psi).unwrap(), placement: Placement::PrimalEdge };
        let r = reconstruct_tangential_1form(&m, &d, &flux).unwrap();
        assert!(r.max_residual < 1e-14);
        for w in &r.triangle_velocity {
            assert!((w - Point3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        }
        let exact = project_1form(|_| Point3::new(1.0, 0.0, 0.0), &m);
        for (a, b) in r.v_primal.values.iter().zip(&exact.values) {
            assert!((a - b).abs() < 1e-13);
        }
        let u = FormField {
            values: flux.values.iter().zip(&d.star1).map(|(f, s)| f * s).collect(),
            placement: Placement::DualEdge,
        };
        let r2 = reconstruct_tangential_1form(&m, &d, &u).unwrap();
        assert!((r2.triangle_velocity[0] - r.triangle_velocity[0]).norm() < 1e-12);
    }

    #[test]
    fn reconstruction_stays_in_the_tangent_plane() {
        let m = lift_sinusoidal(&structured_grid(8).unwrap()).unwrap();
        let d = DualMetrics::new(&m).unwrap();
        let psi: Vec<f64> = m.nodes().iter().map(|p| 0.3 * p.x - 0.8 * p.y).collect();
        let flux = FormField { values: m.d0().spmv(&psi).unwrap(), placement: Placement::PrimalEdge };
        let r = reconstruct_tangential_1form(&m, &d, &flux).unwrap();
        for (t, w) in r.triangle_velocity.iter().enumerate() {
            assert!(w.dot(&m.triangle_normal(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_flow_on_a_flat_torus_has_no_vorticity() {
        let m = periodic_identify(&structured_grid(8).unwrap()).unwrap();
        let d = DualMetrics::new(&m).unwrap();
        let u = project_dual_1form(|_| Point3::new(0.6, -0.3, 0.0), &m, &d);
        let w = vorticity(&m, &d, &u).unwrap();
        assert!(w.max_abs() < 1e-12);
    }

    #[test]
    fn exact_poiseuille_flow_is_nearly_steady() {
        let m = delaunay_unit_square(512, 4).unwrap();
        let d = DualMetrics::new(&m).unwrap();
        let psi: Vec<f64> = m.nodes().iter().map(|&p| poiseuille_stream_function(p)).collect();
        let bc = NsBoundary::Dirichlet { psi: psi.clone(), tangential: vec![0.0; m.boundary_edges().len()] };
        let solver = NsSolver::new(&m, &d, bc).unwrap();
        let s0 = solver.state_from_psi(psi.clone(), 0.0, 1e-2, 1.0).unwrap();
        let s1 = solver.step(&s0).unwrap();
        let change = s1.psi.values.iter().zip(&psi).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(change < 1e-3, "{change}");
        // net flux out of every triangle vanishes
        let div = m.d1().spmv(&solver.flux(&s1).unwrap().values).unwrap();
        assert!(div.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn inviscid_steps_conserve_circulation_on_a_torus() {
        let m = periodic_identify(&lift_sinusoidal(&structured_grid(16).unwrap()).unwrap()).unwrap();
        let d = DualMetrics::new(&m).unwrap();
        let psi: Vec<f64> = m.nodes().iter().map(|p| (2.0 * std::f64::consts::PI * p.y).sin() * 0.1).collect();
        let solver = NsSolver::new(&m, &d, NsBoundary::Periodic { pin_node: 0 }).unwrap();
        let mut s = solver.state_from_psi(psi, 0.0, 0.01, 0.0).unwrap();
        let c0 = total_circulation(&m, &s.u_dual).unwrap();
        for _ in 0..3 {
            s = solver.step(&s).unwrap();
        }
        assert!((total_circulation(&m, &s.u_dual).unwrap() - c0).abs() < 1e-12);
        assert!((s.time - 0.03).abs() < 1e-15);
    }
}
