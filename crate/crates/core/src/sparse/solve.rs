use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use super::{LinalgError, SparseMatrix};

/// Relative residual `‖Ax − b‖₂ / ‖b‖₂` every returned solution satisfies.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Estimated `‖A‖∞·‖A⁻¹z‖∞/‖z‖∞` above which a matrix is reported singular.
const SINGULAR_GROWTH: f64 = 1e15;

const MAX_REFINEMENT_STEPS: usize = 3;

/// Square system with an optional pinned unknown for removing a nullspace.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// `(row index, value)`: the row and column are replaced by an identity
    /// row/column and the unknown is fixed to `value`.
    pub pinned: Option<(usize, f64)>,
}

impl LinearSystem {
    pub fn new(matrix: SparseMatrix, rhs: Vec<f64>) -> Self {
        Self { matrix, rhs, pinned: None }
    }

    pub fn with_pin(mut self, index: usize, value: f64) -> Self {
        self.pinned = Some((index, value));
        self
    }

    /// Matrix and right-hand side after the pin has been applied.
    pub fn pinned_parts(&self) -> Result<(SparseMatrix, Vec<f64>), LinalgError> {
        let a = &self.matrix;
        if !a.is_square() || self.rhs.len() != a.nrows() {
            return Err(LinalgError::DimensionMismatch {
                op: "solve",
                left: (a.nrows(), a.ncols()),
                right: (self.rhs.len(), 1),
            });
        }
        let Some((p, value)) = self.pinned else {
            return Ok((a.clone(), self.rhs.clone()));
        };
        let mut rhs = self.rhs.clone();
        let mut triplets = Vec::with_capacity(a.nnz());
        for (i, j, v) in a.triplets() {
            if i == p {
                continue;
            }
            if j == p {
                rhs[i] -= v * value;
                continue;
            }
            triplets.push((i, j, v));
        }
        triplets.push((p, p, 1.0));
        rhs[p] = value;
        Ok((SparseMatrix::from_triplets(a.nrows(), a.ncols(), &triplets), rhs))
    }
}

/// Sparse LU factorization with partial pivoting and a fill-reducing column order.
pub struct LuFactorization {
    n: usize,
    lu: Lu<usize, f64>,
}

impl LuFactorization {
    pub fn new(a: &SparseMatrix) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::DimensionMismatch {
                op: "factorize",
                left: (a.nrows(), a.ncols()),
                right: (a.ncols(), a.nrows()),
            });
        }
        let n = a.nrows();
        let triplets: Vec<_> = a.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        let csc = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| LinalgError::Backend(format!("{e:?}")))?;
        // the backend panics instead of erroring on an exactly zero pivot
        let factored = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| csc.sp_lu()))
            .map_err(|_| LinalgError::SingularMatrix { detail: "exactly zero pivot".into() })?;
        let lu = factored.map_err(|e| match e {
            faer::sparse::linalg::LuError::SymbolicSingular { index } => {
                LinalgError::SingularMatrix { detail: format!("structurally singular at pivot {index}") }
            }
            other => LinalgError::Backend(format!("{other:?}")),
        })?;
        Ok(Self { n, lu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(x.as_mut());
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let mut x = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_transpose_in_place(x.as_mut());
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.spmv(x).expect("conforming");
    b.iter().zip(ax).map(|(bi, axi)| bi - axi).collect()
}

/// Deterministic probe vector with no special structure.
fn probe_vector(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662).fract()).collect()
}

/// Direct solve with residual verification and iterative refinement.
///
/// Returns [`LinalgError::SingularMatrix`] when the factorization produces
/// non-finite values or the inverse growth exceeds working precision, and
/// [`LinalgError::InaccurateSolution`] if the residual contract cannot be met.
pub fn solve(system: &LinearSystem) -> Result<Vec<f64>, LinalgError> {
    let (a, b) = system.pinned_parts()?;
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lu = LuFactorization::new(&a)?;

    let probe = probe_vector(n);
    let y = lu.solve(&probe);
    let growth = a.norm_inf() * norm_inf(&y) / norm_inf(&probe);
    if !growth.is_finite() || growth > SINGULAR_GROWTH {
        return Err(LinalgError::SingularMatrix { detail: format!("inverse growth {growth:.3e}") });
    }

    let mut x = lu.solve(&b);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::SingularMatrix { detail: "non-finite solution".into() });
    }
    let bnorm = norm2(&b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut r = residual(&a, &x, &b);
    let mut rel = norm2(&r) / bnorm;
    let mut steps = 0;
    while rel > RESIDUAL_TOLERANCE * 1e-2 && steps < MAX_REFINEMENT_STEPS {
        let dx = lu.solve(&r);
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(xi, di)| xi + di).collect();
        let r_new = residual(&a, &candidate, &b);
        let rel_new = norm2(&r_new) / bnorm;
        if rel_new.is_nan() || rel_new >= rel {
            break;
        }
        x = candidate;
        r = r_new;
        rel = rel_new;
        steps += 1;
    }
    if rel > RESIDUAL_TOLERANCE {
        return Err(LinalgError::InaccurateSolution { residual: rel });
    }
    Ok(x)
}
