use crate::error::{param_err, Result};
use crate::sketch::{sketch_rows_for_gram_with, SketchKind};

/// Gram accuracy and failure probability handed to the row-count formula,
/// together with the resulting size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchSizing {
    pub kind: SketchKind,
    pub eps: f64,
    pub delta: f64,
    pub rows: usize,
}

fn check(nu: f64, gap: f64, delta: f64) -> Result<()> {
    if !(nu > 0.0 && nu < 1.0) {
        return param_err(format!("nu must lie in (0, 1), got {nu}"));
    }
    if !(gap > 0.0 && gap <= 1.0) {
        return param_err(format!("gap must lie in (0, 1], got {gap}"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return param_err(format!("delta must lie in (0, 1), got {delta}"));
    }
    Ok(())
}

fn sized(kind: SketchKind, sr: f64, eps: f64, delta: f64, constant: f64) -> Result<SketchSizing> {
    let rows = sketch_rows_for_gram_with(kind, sr, eps, delta, constant)?;
    Ok(SketchSizing { kind, eps, delta, rows })
}

/// Rows of `S` for left sketching: `ε = ν'/(1+ν')·gap` with
/// `ν' = ν/√(1+ν²)`.
pub fn left_sketch_rows(
    kind: SketchKind,
    sr: f64,
    gap: f64,
    nu: f64,
    delta: f64,
    constant: f64,
) -> Result<SketchSizing> {
    check(nu, gap, delta)?;
    let nu1 = nu / (1.0 + nu * nu).sqrt();
    sized(kind, sr, nu1 / (1.0 + nu1) * gap, delta, constant)
}

/// Rows of `G` for right sketching: `ε = ν/(1+ν)·gap`.
pub fn right_sketch_rows(
    kind: SketchKind,
    sr: f64,
    gap: f64,
    nu: f64,
    delta: f64,
    constant: f64,
) -> Result<SketchSizing> {
    check(nu, gap, delta)?;
    sized(kind, sr, nu / (1.0 + nu) * gap, delta, constant)
}

/// Rows of `G` in two-sided sketching: accuracy `ν/2` at failure `δ/2`.
pub fn two_sided_g_rows(
    kind: SketchKind,
    sr: f64,
    gap: f64,
    nu: f64,
    delta: f64,
    constant: f64,
) -> Result<SketchSizing> {
    check(nu, gap, delta)?;
    let half = nu / 2.0;
    sized(kind, sr, half / (1.0 + half) * gap, delta / 2.0, constant)
}

/// Rows of `S` in two-sided sketching. `sr` and `gap` are those of the
/// realized `AGᵀ`.
pub fn two_sided_s_rows(
    kind: SketchKind,
    sr: f64,
    gap: f64,
    nu: f64,
    delta: f64,
    constant: f64,
) -> Result<SketchSizing> {
    check(nu, gap, delta)?;
    let nu2 = nu / (1.0 + nu * nu / 4.0).sqrt();
    let half = nu2 / 2.0;
    sized(kind, sr, half / (1.0 + half) * gap, delta / 2.0, constant)
}

/// TensorSketch columns for sketched kernel PCR:
/// `C·3^q·Tr(K)²/((λ_k − λ_{k+1})²ν²δ)`. Usually far larger than needed.
pub fn kernel_sketch_cols(
    degree: usize,
    trace: f64,
    eigengap: f64,
    nu: f64,
    delta: f64,
    constant: f64,
) -> Result<usize> {
    if degree == 0 {
        return param_err("kernel degree must be at least 1");
    }
    if !(trace > 0.0 && trace.is_finite()) || !(eigengap > 0.0 && eigengap <= trace) {
        return param_err(format!(
            "need 0 < eigengap <= trace, got eigengap = {eigengap}, trace = {trace}"
        ));
    }
    if !(nu > 0.0 && nu < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return param_err(format!("need nu, delta in (0, 1), got nu = {nu}, delta = {delta}"));
    }
    if !(constant > 0.0 && constant.is_finite()) {
        return param_err(format!("constant must be positive, got {constant}"));
    }
    let cols = constant * 3f64.powi(degree as i32) * (trace / eigengap).powi(2) / (nu * nu * delta);
    Ok(cols.ceil() as usize)
}
