use crate::error::{dim_err, param_err, PcrError, Result};
use crate::linalg::{DataMatrix, DenseMatrix, DenseVector};
use crate::sketch::SketchOperator;

/// A linear map `ℝ^ncols → ℝ^nrows` usable by the preconditioned solver.
pub trait LsOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &DenseVector) -> DenseVector;
    fn apply_transpose(&self, y: &DenseVector) -> DenseVector;
    /// `S · self`.
    fn sketch(&self, s: &SketchOperator) -> Result<DenseMatrix>;
}

impl LsOperator for DenseMatrix {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &DenseVector) -> DenseVector {
        self * x
    }

    fn apply_transpose(&self, y: &DenseVector) -> DenseVector {
        self.tr_mul(y)
    }

    fn sketch(&self, s: &SketchOperator) -> Result<DenseMatrix> {
        s.apply_left(&DataMatrix::Dense(self.clone()))
    }
}

/// `outer · inner`, applied factor by factor.
#[derive(Debug, Clone, Copy)]
pub struct FactoredOperator<'a> {
    pub outer: &'a DataMatrix,
    pub inner: &'a DenseMatrix,
}

impl LsOperator for FactoredOperator<'_> {
    fn nrows(&self) -> usize {
        self.outer.nrows()
    }

    fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    fn apply(&self, x: &DenseVector) -> DenseVector {
        self.outer.mul_vec(&(self.inner * x)).expect("factor shapes validated")
    }

    fn apply_transpose(&self, y: &DenseVector) -> DenseVector {
        self.inner
            .tr_mul(&self.outer.tr_mul_vec(y).expect("factor shapes validated"))
    }

    fn sketch(&self, s: &SketchOperator) -> Result<DenseMatrix> {
        Ok(s.apply_left(self.outer)? * self.inner)
    }
}

#[derive(Debug, Clone, Default)]
pub struct IterativeLsConfig {
    /// CountSketch rows for the preconditioner; `4k²` when unset.
    pub sketch_rows: Option<usize>,
    pub seed: u64,
    /// Defaults to `4·⌈ln(max(k, 2)/eps)⌉`.
    pub max_iterations: Option<usize>,
    /// Tighten the target by the squared condition number of the
    /// preconditioner, so the error bound also holds for the coefficients
    /// in their original coordinates.
    pub coefficient_accuracy: bool,
}

#[derive(Debug, Clone)]
pub struct LsOutcome {
    pub solution: DenseVector,
    pub iterations: usize,
    /// Condition number of the triangular preconditioner.
    pub preconditioner_condition: f64,
}

/// Least squares `min ‖cγ − b‖` to relative accuracy `eps` in the `c`-norm.
pub fn precond_iterative_ls(c: &impl LsOperator, b: &DenseVector, eps: f64) -> Result<DenseVector> {
    precond_iterative_ls_with(c, b, eps, &IterativeLsConfig::default()).map(|o| o.solution)
}

/// Sketch-preconditioned CGLS. A CountSketch of `c` is QR-factorized; its
/// triangular factor `R` preconditions `c` from the right, the sketched
/// problem supplies the starting point, and CGLS runs on `cR⁻¹`.
pub fn precond_iterative_ls_with(
    c: &impl LsOperator,
    b: &DenseVector,
    eps: f64,
    cfg: &IterativeLsConfig,
) -> Result<LsOutcome> {
    let (n, k) = (c.nrows(), c.ncols());
    if b.len() != n {
        return dim_err(format!("rhs of length {} for {n} rows", b.len()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return param_err(format!("eps must lie in (0, 1), got {eps}"));
    }
    if k == 0 || k > n {
        return Err(PcrError::RankDeficient(format!("{n}x{k} cannot have full column rank")));
    }

    let rows = cfg.sketch_rows.unwrap_or(4 * k * k).max(k);
    let s = SketchOperator::countsketch(rows, n, cfg.seed)?.compact();
    if s.out_dim() < k {
        return Err(PcrError::RankDeficient(
            "sketch has fewer nonzero rows than columns".into(),
        ));
    }
    let sc = c.sketch(&s)?;
    let qr = sc.qr();
    let r = qr.r();
    let pivots: Vec<f64> = (0..k).map(|i| r[(i, i)].abs()).collect();
    let pmax = pivots.iter().copied().fold(0.0, f64::max);
    if pmax == 0.0
        || pivots
            .iter()
            .any(|&p| p <= pmax * s.out_dim().max(k) as f64 * f64::EPSILON)
    {
        return Err(PcrError::RankDeficient("sketched operator is rank deficient".into()));
    }
    let r_sv = r.singular_values();
    let cond = r_sv.max() / r_sv.min();

    let target = if cfg.coefficient_accuracy {
        eps / (cond * cond)
    } else {
        eps
    };
    let max_iter = cfg
        .max_iterations
        .unwrap_or(4 * ((k.max(2) as f64 / target).ln().ceil() as usize).max(1));

    let solve_r = |v: &DenseVector| r.solve_upper_triangular(v).expect("pivots checked");
    let solve_rt = |v: &DenseVector| r.tr_solve_upper_triangular(v).expect("pivots checked");
    let apply_b = |z: &DenseVector| c.apply(&solve_r(z));
    let apply_bt = |y: &DenseVector| solve_rt(&c.apply_transpose(y));

    let q = qr.q();
    let mut z = q.tr_mul(&s.apply_vec(b)?);
    let mut resid = b - apply_b(&z);
    let mut grad = apply_bt(&resid);
    let mut dir = grad.clone();
    let mut gamma = grad.norm_squared();
    // Preconditioned operator has singular values near 1; a stopping ratio of
    // √target/2 leaves room for sketch distortion up to one half.
    let ratio_goal = 0.5 * target.sqrt() / (1.0 + target.sqrt());
    let b_norm_est = 2.0;

    let mut iterations = 0;
    loop {
        let fitted = (b - &resid).norm();
        let gnorm = gamma.sqrt();
        let floor = 64.0 * f64::EPSILON * b_norm_est * (resid.norm() + b_norm_est * z.norm());
        if gnorm <= ratio_goal * fitted || gnorm <= floor || fitted == 0.0 && gnorm == 0.0 {
            break;
        }
        if iterations >= max_iter {
            return Err(PcrError::NotConverged {
                iterations,
                ratio: if fitted > 0.0 { gnorm / fitted } else { f64::INFINITY },
            });
        }
        let bd = apply_b(&dir);
        let denom = bd.norm_squared();
        if denom == 0.0 {
            break;
        }
        let alpha = gamma / denom;
        z.axpy(alpha, &dir, 1.0);
        resid.axpy(-alpha, &bd, 1.0);
        grad = apply_bt(&resid);
        let next = grad.norm_squared();
        dir = &grad + dir * (next / gamma);
        gamma = next;
        iterations += 1;
    }

    Ok(LsOutcome {
        solution: solve_r(&z),
        iterations,
        preconditioner_condition: cond,
    })
}
