//! Fixed-design statistics, planted test instances, risk bounds and the
//! conversion from accuracy targets to sketch sizes.

mod bounds;
mod model;
mod planted;
mod sizing;

pub use bounds::{risk_bound_check, BoundKind, BoundReport};
pub use model::{bias_variance, excess_risk_mc, BiasVariance, FixedDesignModel, NoiseKind, RiskEstimate};
pub use planted::{gaussian_matrix, matrix_with_spectrum, planted_matrix, planted_spectrum, random_orthonormal};
pub use sizing::{
    kernel_sketch_cols, left_sketch_rows, right_sketch_rows, two_sided_g_rows, two_sided_s_rows, SketchSizing,
};
