use crate::error::{dim_err, param_err, Result};
use crate::linalg::{dominant_right_basis, DataMatrix, DenseMatrix, DenseVector};
use crate::sketch::{derive_seed, SketchOperator};

use super::iterative::{precond_iterative_ls_with, FactoredOperator, IterativeLsConfig};
use super::problem::PcrProblem;

#[derive(Debug, Clone)]
pub struct InputSparsityOutput {
    /// Approximate minimizer over `range(R)`; `Ay` approximates the PCP.
    pub y: DenseVector,
    /// `R = Gᵀ V_{D,k}` materialized (d×k), for verification.
    pub r: DenseMatrix,
    pub iterations: usize,
    /// Rows of `G` left after removing empty ones.
    pub g_rows_kept: usize,
}

/// Input-sparsity PCP with CountSketch `S` (s×n) and `G` (t×d) drawn from
/// `seed`.
pub fn input_sparsity_pcp(p: &PcrProblem, s: usize, t: usize, eps: f64, seed: u64) -> Result<InputSparsityOutput> {
    if s < p.k() || t < p.k() {
        return param_err(format!("sketch sizes s = {s}, t = {t} must be at least k = {}", p.k()));
    }
    let s_op = SketchOperator::countsketch(s, p.nrows(), derive_seed(seed, 1))?;
    let g_op = SketchOperator::countsketch(t, p.ncols(), derive_seed(seed, 2))?;
    let cfg = IterativeLsConfig {
        seed: derive_seed(seed, 3),
        ..Default::default()
    };
    input_sparsity_pcp_with(p, &s_op, &g_op, eps, &cfg)
}

/// Input-sparsity PCP with given sketches. `C = AGᵀ`, `D = SC` and the
/// top-`k` right basis `V` of `D` are formed explicitly; `min ‖CVγ − b‖` is
/// solved to accuracy `eps/d` without forming `CV`; the result is `GᵀVγ`.
pub fn input_sparsity_pcp_with(
    p: &PcrProblem,
    s_op: &SketchOperator,
    g_op: &SketchOperator,
    eps: f64,
    cfg: &IterativeLsConfig,
) -> Result<InputSparsityOutput> {
    if !(eps > 0.0 && eps < 1.0) {
        return param_err(format!("eps must lie in (0, 1), got {eps}"));
    }
    if s_op.in_dim() != p.nrows() || g_op.in_dim() != p.ncols() {
        return dim_err("sketch inputs do not match the data matrix");
    }
    let g = g_op.compact();
    let c = DataMatrix::Dense(g.apply_right_transpose(p.a())?);
    let d = s_op.apply_left_compact(&c)?;
    let v = dominant_right_basis(&d, p.k())?.v_k;
    let op = FactoredOperator { outer: &c, inner: &v };
    let cfg = IterativeLsConfig {
        coefficient_accuracy: true,
        ..cfg.clone()
    };
    let outcome = precond_iterative_ls_with(&op, p.b(), eps / p.ncols() as f64, &cfg)?;
    let vg = &v * &outcome.solution;
    let y = g
        .apply_transpose(&DenseMatrix::from_column_slice(vg.len(), 1, vg.as_slice()))?
        .column(0)
        .into_owned();
    let r = g.apply_transpose(&v)?;
    Ok(InputSparsityOutput {
        y,
        r,
        iterations: outcome.iterations,
        g_rows_kept: g.out_dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{cls, exact_pcr, sketched_pcr};

    fn instance(n: usize, d: usize, k: usize) -> PcrProblem {
        let a = DenseMatrix::from_fn(n, d, |i, j| {
            let noise = (((i * 131 + j * 71) % 97) as f64 / 97.0 - 0.5) * 0.2;
            noise + if i % d == j { 4.0 / (1.0 + j as f64) } else { 0.0 }
        });
        let b = DenseVector::from_fn(n, |i, _| ((i * 13) % 11) as f64 / 11.0 - 0.4);
        PcrProblem::new(a, b, k).unwrap()
    }

    #[test]
    fn matches_materialized_oracle() {
        let p = instance(50, 40, 3);
        let out = input_sparsity_pcp(&p, 30, 20, 1e-10, 5).unwrap();
        let oracle = sketched_pcr(&p, &out.r).unwrap().x;
        assert!((&out.y - &oracle).norm() <= 1e-4 * oracle.norm());
        let x_r = cls(&p, &out.r).unwrap().x;
        assert!((oracle - x_r).norm() <= 1e-10 * out.y.norm());
    }

    #[test]
    fn degenerate_sketches_recover_pcr() {
        let p = instance(30, 8, 2);
        let s = SketchOperator::identity(30).unwrap();
        let g = SketchOperator::countsketch_from_parts(
            8,
            vec![3, 1, 7, 0, 2, 6, 5, 4],
            vec![1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0],
        )
        .unwrap();
        let out = input_sparsity_pcp_with(&p, &s, &g, 1e-12, &IterativeLsConfig::default()).unwrap();
        let x_k = exact_pcr(&p).unwrap().x;
        assert!((out.y - &x_k).norm() < 1e-8 * x_k.norm().max(1.0));
    }

    #[test]
    fn rejects_parameters() {
        let p = instance(30, 8, 2);
        assert!(input_sparsity_pcp(&p, 1, 5, 0.1, 0).is_err());
        assert!(input_sparsity_pcp(&p, 5, 5, 1.0, 0).is_err());
    }
}
