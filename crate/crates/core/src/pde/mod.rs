//! Poisson problems for primal and dual 0-forms and for 1-forms, and the
//! stream-function Navier–Stokes stepper.

mod ns;
mod poisson;

pub use ns::{
    ns_step, poiseuille_stream_function, poiseuille_velocity, reconstruct_tangential_1form, shear_layer_velocity,
    total_circulation, vorticity, NSState, NsBoundary, NsSolver, Reconstruction, SHEAR_LAYER_RHO,
};
pub use poisson::{
    dual0_operator, one_form_operator, primal0_operator, primal0_stiffness, solve_poisson_1form, solve_poisson_dual0,
    solve_poisson_primal0, solve_poisson_primal0_scaled,
};

use thiserror::Error;

use crate::dual::{DualError, ZERO_VOLUME_TOLERANCE};
use crate::forms::FormError;
use crate::sparse::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("least-squares reconstruction is rank deficient in triangle {triangle}")]
    RankDeficient { triangle: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// `1/coefficients[i]` for the listed entries and zero elsewhere; fails when the
/// matching dual volume vanishes.
fn reciprocals_on(
    kind: &'static str,
    volumes: &[f64],
    coefficients: &[f64],
    indices: impl IntoIterator<Item = usize>,
) -> Result<Vec<f64>, DualError> {
    let mut out = vec![0.0; coefficients.len()];
    for i in indices {
        let v = volumes[i];
        if v.abs() < ZERO_VOLUME_TOLERANCE {
            return Err(DualError::ZeroDualVolume { kind, index: i, value: v });
        }
        out[i] = 1.0 / coefficients[i];
    }
    Ok(out)
}
