use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{param_err, Result};
use crate::linalg::{DenseMatrix, DenseVector};

const HEAD_STEP: f64 = 0.02;
const TAIL_RATIO: f64 = 0.25;

/// I.i.d. standard normal entries.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed matrix with orthonormal columns.
pub fn random_orthonormal(rows: usize, cols: usize, seed: u64) -> Result<DenseMatrix> {
    if cols == 0 || cols > rows {
        return param_err(format!("cannot draw {cols} orthonormal columns in dimension {rows}"));
    }
    let qr = gaussian_matrix(rows, cols, seed).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

/// Singular values `σ₁ = 1 ≥ … ≥ σ_k` in a slow linear decline in `σ²`, then
/// `σ_{k+1}² = σ_k² − gap`, then a geometric tail; `relative_gap(·, k) = gap`.
pub fn planted_spectrum(len: usize, k: usize, gap: f64) -> Result<Vec<f64>> {
    if k == 0 || k >= len {
        return param_err(format!("split {k} must satisfy 1 ≤ k < {len}"));
    }
    if !(gap > 0.0 && gap < 1.0) {
        return param_err(format!("gap must lie in (0, 1), got {gap}"));
    }
    let step = HEAD_STEP.min(0.5 * (1.0 - gap) / k as f64);
    let mut sq: Vec<f64> = (0..k).map(|i| 1.0 - step * i as f64).collect();
    let mut next = sq[k - 1] - gap;
    for _ in k..len {
        sq.push(next);
        next *= TAIL_RATIO;
    }
    Ok(sq.into_iter().map(f64::sqrt).collect())
}

/// `U diag(sigma) Vᵀ` with Haar-random orthonormal factors.
pub fn matrix_with_spectrum(n: usize, d: usize, sigma: &[f64], seed: u64) -> Result<DenseMatrix> {
    if sigma.is_empty() || sigma.len() > n.min(d) {
        return param_err(format!("{} singular values for a {n}x{d} matrix", sigma.len()));
    }
    let r = sigma.len();
    let u = random_orthonormal(n, r, seed)?;
    let v = random_orthonormal(d, r, seed.wrapping_add(0x9E37_79B9))?;
    Ok(u * DenseMatrix::from_diagonal(&DenseVector::from_column_slice(sigma)) * v.transpose())
}

/// Full-rank `n×d` matrix with [`planted_spectrum`] and relative gap `gap` at `k`.
pub fn planted_matrix(n: usize, d: usize, k: usize, gap: f64, seed: u64) -> Result<DenseMatrix> {
    let sigma = planted_spectrum(n.min(d), k, gap)?;
    matrix_with_spectrum(n, d, &sigma, seed)
}
