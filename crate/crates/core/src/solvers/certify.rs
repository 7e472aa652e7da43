use crate::error::Result;
use crate::linalg::DenseVector;

use super::exact::ExactReference;
use super::problem::{PcrProblem, PcrSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateMode {
    Pcr,
    Pcp,
}

/// Observed `(ε, υ)` of an approximate solution, both normalized by `‖b‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxCertificate {
    pub eps_observed: f64,
    pub upsilon_observed: f64,
    /// `‖Ax_k − b‖₂`.
    pub reference_objective: f64,
}

pub fn certify(p: &PcrProblem, sol: &PcrSolution, mode: CertificateMode) -> Result<ApproxCertificate> {
    let reference = ExactReference::new(p)?;
    certify_with(&reference, p, &sol.x, mode)
}

/// Certificate of `x` against a precomputed reference.
pub fn certify_with(
    reference: &ExactReference,
    p: &PcrProblem,
    x: &DenseVector,
    mode: CertificateMode,
) -> Result<ApproxCertificate> {
    match mode {
        CertificateMode::Pcr => {
            let scale = normalizer(reference);
            let objective = p.objective(x)?;
            Ok(ApproxCertificate {
                eps_observed: (objective - reference.objective()).abs() / scale,
                upsilon_observed: reference.constraint_norm(x) / scale,
                reference_objective: reference.objective(),
            })
        }
        CertificateMode::Pcp => {
            let b_tilde = p.a().mul_vec(x)?;
            Ok(certify_projection(reference, p, &b_tilde))
        }
    }
}

/// Certificate of an approximate projection `b̃` of `b`.
pub fn certify_projection(reference: &ExactReference, p: &PcrProblem, b_tilde: &DenseVector) -> ApproxCertificate {
    let scale = normalizer(reference);
    let objective = (b_tilde - p.b()).norm();
    ApproxCertificate {
        eps_observed: (objective - reference.objective()).abs() / scale,
        upsilon_observed: reference.projection_leak(b_tilde) / scale,
        reference_objective: reference.objective(),
    }
}

fn normalizer(reference: &ExactReference) -> f64 {
    if reference.b_norm() > 0.0 {
        reference.b_norm()
    } else {
        1.0
    }
}
