//! Sketching-based approximate principal component regression (PCR) and
//! principal component projection (PCP).
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense and sparse matrices, thin SVD, projectors, principal angles.
//! * [`sketch`]: seeded subgaussian, CountSketch and TensorSketch operators.
//! * [`solvers`]: exact, compressed and sketched PCR/PCP, plus the
//!   input-sparsity PCP algorithm and its preconditioned least-squares core.
//! * [`streaming`]: one-pass row-insertion estimator.
//! * [`kernel`]: polynomial-kernel PCR, exact and TensorSketch-based.
//! * [`eval`]: fixed-design statistics, planted instances and risk bounds.

pub mod error;
pub mod eval;
pub mod kernel;
pub mod linalg;
pub mod sketch;
pub mod solvers;
pub mod streaming;

pub use error::{PcrError, Result};
pub use linalg::{DataMatrix, DenseMatrix, OrthonormalBasis, SparseMatrix, TruncatedSvd};
pub use sketch::{SketchKind, SketchOperator};
pub use solvers::{PcrProblem, PcrSolution};
