//! Exact, compressed and sketched PCR/PCP estimators.

mod certify;
mod exact;
mod input_sparsity;
mod iterative;
mod problem;
mod sketched;

pub(crate) use sketched::reduced_pcr;

pub use certify::{certify, certify_projection, certify_with, ApproxCertificate, CertificateMode};
pub use exact::{exact_pcp, exact_pcr, ols, ExactReference};
pub use input_sparsity::{input_sparsity_pcp, input_sparsity_pcp_with, InputSparsityOutput};
pub use iterative::{
    precond_iterative_ls, precond_iterative_ls_with, FactoredOperator, IterativeLsConfig, LsOperator, LsOutcome,
};
pub use problem::{Diagnostics, Method, PcrProblem, PcrSolution};
pub use sketched::{
    build_r_left, build_r_right, build_r_twosided, build_r_twosided_from, cls, cls_with, left_sketched_pcr,
    right_sketched_cls, right_sketched_pcr, sketched_pcr, sketched_pcr_with, two_sided_sketched_pcr,
    two_sided_sketched_pcr_from, RightFactor,
};
