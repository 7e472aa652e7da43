use std::time::Instant;

use crate::error::Result;
use crate::linalg::{ensure_gap, full_svd, pinv_solve, DenseVector, ThinSvd, TruncatedSvd};

use super::problem::{Method, PcrProblem, PcrSolution};

/// Full SVD of `A` with the rank-`k` PCR and PCP solutions; the reference
/// against which approximate solutions are certified.
#[derive(Debug, Clone)]
pub struct ExactReference {
    svd: ThinSvd,
    k: usize,
    x_k: DenseVector,
    b_k: DenseVector,
    objective: f64,
    b_norm: f64,
}

impl ExactReference {
    pub fn new(p: &PcrProblem) -> Result<Self> {
        let a = p.a().to_dense();
        let svd = full_svd(&a)?;
        let k = p.k();
        let sigma: Vec<f64> = svd.sigma.iter().copied().collect();
        ensure_gap(&sigma, k, a.nrows(), a.ncols())?;
        let u_k = svd.u.columns(0, k);
        let v_k = svd.v.columns(0, k);
        let coeff = u_k.tr_mul(p.b());
        let b_k = u_k * &coeff;
        let scaled = DenseVector::from_fn(k, |i, _| coeff[i] / svd.sigma[i]);
        let x_k = v_k * scaled;
        let objective = p.objective(&x_k)?;
        Ok(Self {
            svd,
            k,
            x_k,
            b_k,
            objective,
            b_norm: p.b().norm(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn svd(&self) -> &ThinSvd {
        &self.svd
    }

    pub fn truncated(&self) -> TruncatedSvd {
        self.svd.truncate(self.k).expect("k validated at construction")
    }

    /// σ_i, 1-based; zero beyond the thin factorization.
    pub fn sigma(&self, i: usize) -> f64 {
        self.svd.sigma.get(i - 1).copied().unwrap_or(0.0)
    }

    pub fn x_k(&self) -> &DenseVector {
        &self.x_k
    }

    pub fn b_k(&self) -> &DenseVector {
        &self.b_k
    }

    /// `‖Ax_k − b‖₂`.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn b_norm(&self) -> f64 {
        self.b_norm
    }

    /// `‖V_{A,k+}ᵀx‖₂`.
    pub fn constraint_norm(&self, x: &DenseVector) -> f64 {
        let r = self.svd.sigma.len();
        self.svd.v.columns(self.k, r - self.k).tr_mul(x).norm()
    }

    /// `‖U_{A,k+}ᵀy‖₂`.
    pub fn projection_leak(&self, y: &DenseVector) -> f64 {
        let r = self.svd.sigma.len();
        self.svd.u.columns(self.k, r - self.k).tr_mul(y).norm()
    }
}

/// `x_k = V_k Σ_k⁻¹ U_kᵀ b`.
pub fn exact_pcr(p: &PcrProblem) -> Result<PcrSolution> {
    let started = Instant::now();
    let reference = ExactReference::new(p)?;
    let mut sol = PcrSolution::assemble(p, reference.x_k.clone(), Method::Exact, 0, started)?;
    sol.diagnostics.constraint_norm = Some(reference.constraint_norm(&sol.x));
    Ok(sol)
}

/// `b_k = U_k U_kᵀ b`.
pub fn exact_pcp(p: &PcrProblem) -> Result<DenseVector> {
    Ok(ExactReference::new(p)?.b_k)
}

/// Minimum-norm least squares `A⁺b`, ignoring `k`.
pub fn ols(p: &PcrProblem) -> Result<PcrSolution> {
    let started = Instant::now();
    let x = pinv_solve(&p.a().to_dense(), p.b())?;
    PcrSolution::assemble(p, x, Method::Ols, p.ncols(), started)
}
