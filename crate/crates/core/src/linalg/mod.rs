//! Dense and sparse linear algebra kernels.

mod data;
mod dense;
mod sparse;
mod spectral;
mod subspace;
mod svd;

pub use data::DataMatrix;
pub(crate) use dense::gram as dense_gram;
pub use dense::{check_finite, dense_from_row_major, frobenius_norm, DenseMatrix, DenseVector};
pub use sparse::SparseMatrix;
pub use spectral::{
    ensure_gap, relative_gap, relative_gap_from_values, spectral_norm, stable_rank, symmetric_eigen_desc,
    symmetric_spectral_norm, SymmetricEigen, GAP_TOLERANCE,
};
pub use subspace::{
    principal_cosines, project, subspace_distance, tan_theta_norm, OrthonormalBasis, ORTHONORMAL_TOLERANCE,
};
pub use svd::{
    dominant_right_basis, full_svd, lstsq_full_rank, pinv_solve, rank_tolerance, thin_svd, RightBasis, ThinSvd,
    TruncatedSvd,
};
