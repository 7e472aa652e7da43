use crate::error::{dim_err, param_err, Result};
use crate::linalg::{spectral_norm, symmetric_spectral_norm, DataMatrix, DenseMatrix};

use super::{SketchKind, SketchOperator};

/// Multiplier applied to the asymptotic sketch-size formulas.
pub const DEFAULT_GRAM_CONSTANT: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramErrorReport {
    /// `‖XᵀSᵀSX − XᵀX‖₂`.
    pub spectral_error: f64,
    /// `spectral_error / ‖X‖₂²`.
    pub normalized_error: f64,
    pub pass: bool,
}

pub fn gram_error(op: &SketchOperator, x: &DenseMatrix, eps: f64) -> Result<GramErrorReport> {
    if op.in_dim() != x.nrows() {
        return dim_err(format!("sketch input {} vs {} rows", op.in_dim(), x.nrows()));
    }
    let sx = op.apply_left(&DataMatrix::Dense(x.clone()))?;
    let diff = crate::linalg::dense_gram(&sx) - crate::linalg::dense_gram(x);
    let spectral_error = symmetric_spectral_norm(&diff)?;
    let norm2 = spectral_norm(x)?.powi(2);
    let normalized_error = if norm2 > 0.0 { spectral_error / norm2 } else { 0.0 };
    Ok(GramErrorReport {
        spectral_error,
        normalized_error,
        pass: spectral_error <= eps * norm2,
    })
}

/// Rows needed for the approximate Gram property with [`DEFAULT_GRAM_CONSTANT`].
pub fn sketch_rows_for_gram(kind: SketchKind, stable_rank: f64, eps: f64, delta: f64) -> Result<usize> {
    sketch_rows_for_gram_with(kind, stable_rank, eps, delta, DEFAULT_GRAM_CONSTANT)
}

/// `C·(sr + ln(1/δ))/ε²` rows for subgaussian maps, `C·sr²/(ε²δ)` for
/// CountSketch.
pub fn sketch_rows_for_gram_with(
    kind: SketchKind,
    stable_rank: f64,
    eps: f64,
    delta: f64,
    constant: f64,
) -> Result<usize> {
    if !(eps > 0.0 && eps <= 0.5) || !(delta > 0.0 && delta <= 0.5) {
        return param_err(format!("need eps, delta in (0, 1/2], got eps = {eps}, delta = {delta}"));
    }
    if !(stable_rank >= 1.0 && stable_rank.is_finite()) {
        return param_err(format!("stable rank must be at least 1, got {stable_rank}"));
    }
    if !(constant > 0.0 && constant.is_finite()) {
        return param_err(format!("constant must be positive, got {constant}"));
    }
    let rows = match kind {
        SketchKind::Subgaussian => constant * (stable_rank + (1.0 / delta).ln()) / (eps * eps),
        SketchKind::CountSketch => constant * stable_rank * stable_rank / (eps * eps * delta),
        SketchKind::TensorSketch => {
            return param_err("TensorSketch sizes are governed by the kernel bound");
        }
    };
    Ok((rows.ceil() as usize).max(1))
}
