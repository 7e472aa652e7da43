use crate::error::{dim_err, param_err, PcrError, Result};
use crate::linalg::{full_svd, subspace_distance, thin_svd, DenseMatrix, OrthonormalBasis, ORTHONORMAL_TOLERANCE};

use super::model::{bias_variance, FixedDesignModel};

/// Slack below which a bound counts as violated.
pub const BOUND_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum BoundKind {
    /// `‖x*‖²σ_{k+1}²/n + σ²k/n` for the PCR solution.
    PcrCorollary,
    /// `‖V_Aᵀx*‖∞²·Σ_{i>k}σ_i²/n + σ²k/n` for the PCR solution.
    OldPcr,
    /// `(1+ν)‖x*‖²σ_{k+1}²/n + σ²k/n` for `x_R` with `R` orthonormal d×k
    /// and `d₂(R, V_{A,k}) ≤ ν/√(1+ν²)`.
    StatStructural { r: DenseMatrix, nu: f64 },
    /// `E(x_k) + (2ν+ν²)‖f‖²/n` for `x_{R,k}` when
    /// `d₂(U_{AR,k}, U_{A,k}) ≤ ν`.
    StructStatPcp { r: DenseMatrix, nu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub risk: f64,
    pub bound: f64,
    /// `bound − risk`.
    pub slack: f64,
}

impl BoundReport {
    fn new(risk: f64, bound: f64) -> Self {
        Self {
            risk,
            bound,
            slack: bound - risk,
        }
    }

    pub fn holds(&self) -> bool {
        self.slack >= -BOUND_TOLERANCE
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return param_err(format!("nu must be finite and nonnegative, got {nu}"));
    }
    Ok(())
}

/// Evaluates the risk side in closed form and the chosen bound; prerequisites
/// that fail are returned as errors.
pub fn risk_bound_check(model: &FixedDesignModel, k: usize, kind: &BoundKind) -> Result<BoundReport> {
    let a = model.a();
    let (n, d) = (a.nrows(), a.ncols());
    if k == 0 || k > n.min(d) {
        return dim_err(format!("k = {k} outside 1..={}", n.min(d)));
    }
    let svd = full_svd(a)?;
    let nf = n as f64;
    let sigma_next = svd.sigma.get(k).copied().unwrap_or(0.0);
    let x_norm2 = model.x_star().norm_squared();
    let variance_k = model.sigma().powi(2) * k as f64 / nf;
    let v_k = svd.v.columns(0, k).into_owned();

    match kind {
        BoundKind::PcrCorollary => {
            let risk = bias_variance(model, &v_k)?.total();
            Ok(BoundReport::new(
                risk,
                x_norm2 * sigma_next * sigma_next / nf + variance_k,
            ))
        }
        BoundKind::OldPcr => {
            let risk = bias_variance(model, &v_k)?.total();
            let coords = svd.v.tr_mul(model.x_star());
            let inf = coords.amax();
            let tail: f64 = svd.sigma.iter().skip(k).map(|s| s * s).sum();
            Ok(BoundReport::new(risk, inf * inf * tail / nf + variance_k))
        }
        BoundKind::StatStructural { r, nu } => {
            check_nu(*nu)?;
            if r.nrows() != d || r.ncols() != k {
                return dim_err(format!("R is {}x{}, expected {d}x{k}", r.nrows(), r.ncols()));
            }
            let basis = OrthonormalBasis::new(r.clone())
                .map_err(|_| PcrError::Prerequisite("R does not have orthonormal columns".into()))?;
            let target = OrthonormalBasis::new(v_k)?;
            let dist = subspace_distance(&basis, &target)?;
            let limit = nu / (1.0 + nu * nu).sqrt();
            if dist > limit + ORTHONORMAL_TOLERANCE {
                return Err(PcrError::Prerequisite(format!(
                    "d2(R, V_k) = {dist:.3e} exceeds {limit:.3e}"
                )));
            }
            let risk = bias_variance(model, r)?.total();
            Ok(BoundReport::new(
                risk,
                (1.0 + nu) * x_norm2 * sigma_next * sigma_next / nf + variance_k,
            ))
        }
        BoundKind::StructStatPcp { r, nu } => {
            check_nu(*nu)?;
            if r.nrows() != d {
                return dim_err(format!("R has {} rows for {d} columns of A", r.nrows()));
            }
            let ar = a * r;
            if k > ar.nrows().min(ar.ncols()) {
                return dim_err(format!("k = {k} exceeds the rank bound of AR"));
            }
            let ar_svd = thin_svd(&ar, k)?;
            let u_ar = OrthonormalBasis::new(ar_svd.u_k.clone())?;
            let u_a = OrthonormalBasis::new(svd.u.columns(0, k).into_owned())?;
            let dist = subspace_distance(&u_ar, &u_a)?;
            if dist > nu + ORTHONORMAL_TOLERANCE {
                return Err(PcrError::Prerequisite(format!(
                    "d2(U_AR,k, U_A,k) = {dist:.3e} exceeds {nu:.3e}"
                )));
            }
            let m = r * &ar_svd.v_k;
            let risk = bias_variance(model, &m)?.total();
            let base = bias_variance(model, &v_k)?.total();
            Ok(BoundReport::new(
                risk,
                base + (2.0 * nu + nu * nu) * model.f().norm_squared() / nf,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::planted::planted_matrix;
    use crate::linalg::DenseVector;

    fn model() -> FixedDesignModel {
        let a = planted_matrix(40, 12, 3, 0.4, 2).unwrap();
        let f = DenseVector::from_fn(40, |i, _| ((i * 7 % 11) as f64 - 5.0) / 5.0);
        FixedDesignModel::new(a, f, 0.3).unwrap()
    }

    #[test]
    fn exact_basis_reduces_to_corollary() {
        let m = model();
        let v_k = full_svd(m.a()).unwrap().v.columns(0, 3).into_owned();
        let cor = risk_bound_check(&m, 3, &BoundKind::PcrCorollary).unwrap();
        let st = risk_bound_check(&m, 3, &BoundKind::StatStructural { r: v_k, nu: 0.0 }).unwrap();
        assert!((cor.bound - st.bound).abs() < 1e-14);
        assert!((cor.risk - st.risk).abs() < 1e-12);
        assert!(cor.holds() && st.holds());
    }

    #[test]
    fn old_bound_holds() {
        let m = model();
        for k in 1..=5 {
            assert!(risk_bound_check(&m, k, &BoundKind::OldPcr).unwrap().holds());
        }
    }

    #[test]
    fn far_basis_is_a_prerequisite_error() {
        let m = model();
        let v = full_svd(m.a()).unwrap().v;
        let r = v.columns(5, 3).into_owned();
        let err = risk_bound_check(&m, 3, &BoundKind::StatStructural { r, nu: 0.2 }).unwrap_err();
        assert!(matches!(err, PcrError::Prerequisite(_)));
    }

    #[test]
    fn pcp_bound_with_rotated_full_basis() {
        let m = model();
        let r = full_svd(m.a()).unwrap().v;
        let rep = risk_bound_check(&m, 3, &BoundKind::StructStatPcp { r, nu: 1e-6 }).unwrap();
        assert!(rep.holds());
        let extra = (2e-6 + 1e-12) * m.f().norm_squared() / 40.0;
        assert!((rep.slack - extra).abs() < 1e-10);
    }
}
