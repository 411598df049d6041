use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LinalgError, LuFactorization, SparseMatrix};

pub const DENSE_SVD_MAX_ROWS: usize = 3000;

const POWER_MAX_ITERS: usize = 500;
const INVERSE_MAX_ITERS: usize = 100;
const ITER_RTOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CondMode {
    /// σ_max/σ_min from a dense SVD; limited to [`DENSE_SVD_MAX_ROWS`].
    DenseSvd,
    /// Power iteration on AᵀA for σ_max and inverse iteration through the LU
    /// factors for σ_min.
    Estimate,
}

/// 2-norm condition number of a square matrix.
pub fn condition_number(a: &SparseMatrix, mode: CondMode) -> Result<f64, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch {
            op: "condition_number",
            left: (a.nrows(), a.ncols()),
            right: (a.ncols(), a.nrows()),
        });
    }
    match mode {
        CondMode::DenseSvd => dense_condition(a),
        CondMode::Estimate => estimate_condition(a),
    }
}

fn dense_condition(a: &SparseMatrix) -> Result<f64, LinalgError> {
    let n = a.nrows();
    if n > DENSE_SVD_MAX_ROWS {
        return Err(LinalgError::TooLargeForDense { rows: n, limit: DENSE_SVD_MAX_ROWS });
    }
    let mut m = Mat::<f64>::zeros(n, n);
    for (i, j, v) in a.triplets() {
        m[(i, j)] = v;
    }
    let s = m.singular_values().map_err(|e| LinalgError::Backend(format!("{e:?}")))?;
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    if smin < 1e-300 {
        return Err(LinalgError::SingularMatrix { detail: format!("σ_min = {smin:.3e}") });
    }
    Ok(smax / smin)
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    normalize(&mut v);
    v
}

fn estimate_condition(a: &SparseMatrix) -> Result<f64, LinalgError> {
    let n = a.nrows();
    if n == 0 {
        return Ok(1.0);
    }
    let at = a.transpose();

    // σ_max² as the dominant eigenvalue of AᵀA
    let mut v = start_vector(n);
    let mut lambda_max = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let mut w = at.spmv(&a.spmv(&v)?)?;
        let lambda = normalize(&mut w);
        v = w;
        let done = (lambda - lambda_max).abs() <= ITER_RTOL * lambda;
        lambda_max = lambda;
        if done {
            break;
        }
    }

    // 1/σ_min² as the dominant eigenvalue of (AᵀA)⁻¹ = A⁻¹A⁻ᵀ
    let lu = LuFactorization::new(a)?;
    let mut v = start_vector(n);
    let mut mu_max = 0.0;
    for _ in 0..INVERSE_MAX_ITERS {
        let mut w = lu.solve(&lu.solve_transpose(&v));
        if w.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::SingularMatrix { detail: "non-finite inverse iterate".into() });
        }
        let mu = normalize(&mut w);
        v = w;
        let done = (mu - mu_max).abs() <= ITER_RTOL * mu;
        mu_max = mu;
        if done {
            break;
        }
    }
    let sigma_max = lambda_max.sqrt();
    let sigma_min = 1.0 / mu_max.sqrt();
    if sigma_min.is_nan() || sigma_min <= 1e-300 {
        return Err(LinalgError::SingularMatrix { detail: format!("σ_min = {sigma_min:.3e}") });
    }
    Ok(sigma_max / sigma_min)
}
