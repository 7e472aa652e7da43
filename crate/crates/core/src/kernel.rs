//! Polynomial-kernel PCR, `K(x, z) = (xᵀz + c)^q`.
//!
//! The exact model works in the dual: `α = U_k Λ_k⁻¹ U_kᵀ b` from the top-`k`
//! eigenpairs of the Gram matrix. The sketched model works in a
//! TensorSketch-compressed primal space: `ΦR` is formed row by row, and rank-`k`
//! PCR gives coefficients `γ` with predictions `⟨Rᵀφ(z), γ⟩`. A nonzero offset
//! is realized by appending the constant feature `√c`.

use crate::error::{dim_err, param_err, PcrError, Result};
use crate::linalg::{ensure_gap, symmetric_eigen_desc, DataMatrix, DenseMatrix, DenseVector};
use crate::sketch::{SketchKind, SketchOperator};
use crate::solvers::reduced_pcr;

/// Eigenvalues of a Gram matrix down to `-PSD_TOLERANCE·max(1, λ₁)` are
/// clamped to zero; anything more negative is rejected.
pub const PSD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub degree: usize,
    pub offset: f64,
}

impl KernelSpec {
    pub fn new(degree: usize, offset: f64) -> Result<Self> {
        if degree == 0 {
            return param_err("kernel degree must be at least 1");
        }
        if !(offset >= 0.0 && offset.is_finite()) {
            return param_err(format!("kernel offset must be finite and nonnegative, got {offset}"));
        }
        Ok(Self { degree, offset })
    }

    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        let dot: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
        (dot + self.offset).powi(self.degree as i32)
    }

    /// Input dimension seen by the feature map: `d`, or `d + 1` with an offset.
    pub fn feature_input_dim(&self, d: usize) -> usize {
        if self.offset > 0.0 {
            d + 1
        } else {
            d
        }
    }

    /// `z` with `√c` appended when the offset is nonzero.
    pub fn augment(&self, z: &[f64]) -> DenseVector {
        let mut v: Vec<f64> = z.to_vec();
        if self.offset > 0.0 {
            v.push(self.offset.sqrt());
        }
        DenseVector::from_vec(v)
    }

    fn augment_rows(&self, a: &DenseMatrix) -> DenseMatrix {
        if self.offset == 0.0 {
            return a.clone();
        }
        let mut out = a.clone().insert_column(a.ncols(), 0.0);
        out.column_mut(a.ncols()).fill(self.offset.sqrt());
        out
    }
}

/// `K_ij = (a_iᵀa_j + c)^q`.
pub fn kernel_matrix(a: &DenseMatrix, spec: &KernelSpec) -> Result<DenseMatrix> {
    if a.nrows() == 0 {
        return dim_err("kernel matrix of zero rows");
    }
    let inner = a * a.transpose();
    let q = spec.degree as i32;
    let mut k = inner.map(|v| (v + spec.offset).powi(q));
    for i in 0..k.nrows() {
        for j in 0..i {
            let avg = 0.5 * (k[(i, j)] + k[(j, i)]);
            k[(i, j)] = avg;
            k[(j, i)] = avg;
        }
    }
    Ok(k)
}

/// Dual coefficients `α = U_k Λ_k⁻¹ U_kᵀ b` of rank-`k` kernel PCR.
pub fn dual_coefficients(k_mat: &DenseMatrix, b: &DenseVector, k: usize) -> Result<DenseVector> {
    let n = k_mat.nrows();
    if b.len() != n {
        return dim_err(format!("response of length {} for a {n}x{n} kernel", b.len()));
    }
    if k == 0 || k > n {
        return dim_err(format!("rank {k} outside 1..={n}"));
    }
    let eig = symmetric_eigen_desc(k_mat)?;
    let floor = -PSD_TOLERANCE * eig.values[0].max(1.0);
    if eig.values[n - 1] < floor {
        return Err(PcrError::InvalidParameter(format!(
            "kernel matrix is not positive semidefinite (eigenvalue {:e})",
            eig.values[n - 1]
        )));
    }
    let lambda: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0)).collect();
    let sigma: Vec<f64> = lambda.iter().map(|l| l.sqrt()).collect();
    ensure_gap(&sigma, k, n, n)?;
    let u_k = eig.vectors.columns(0, k);
    let coeff = u_k.tr_mul(b);
    let scaled = DenseVector::from_fn(k, |i, _| coeff[i] / lambda[i]);
    Ok(u_k * scaled)
}

#[derive(Debug, Clone)]
pub enum KernelModel {
    Exact {
        rows: DenseMatrix,
        alpha: DenseVector,
        spec: KernelSpec,
        k: usize,
    },
    Sketched {
        sketch: SketchOperator,
        gamma: DenseVector,
        spec: KernelSpec,
        k: usize,
    },
}

impl KernelModel {
    pub fn k(&self) -> usize {
        match self {
            KernelModel::Exact { k, .. } | KernelModel::Sketched { k, .. } => *k,
        }
    }

    pub fn spec(&self) -> &KernelSpec {
        match self {
            KernelModel::Exact { spec, .. } | KernelModel::Sketched { spec, .. } => spec,
        }
    }

    pub fn predict(&self, z: &DenseVector) -> Result<f64> {
        match self {
            KernelModel::Exact { .. } => kernel_predict(self, z),
            KernelModel::Sketched { .. } => sketched_kernel_predict(self, z),
        }
    }
}

/// Rank-`k` kernel PCR on training rows `a`.
pub fn exact_kernel_pcr(a: &DenseMatrix, b: &DenseVector, k: usize, spec: KernelSpec) -> Result<KernelModel> {
    let alpha = dual_coefficients(&kernel_matrix(a, &spec)?, b, k)?;
    Ok(KernelModel::Exact {
        rows: a.clone(),
        alpha,
        spec,
        k,
    })
}

/// `Σ_i (zᵀa_i + c)^q α_i`.
pub fn kernel_predict(model: &KernelModel, z: &DenseVector) -> Result<f64> {
    match model {
        KernelModel::Exact { rows, alpha, spec, .. } => {
            if z.len() != rows.ncols() {
                return dim_err(format!("query of length {} for {} features", z.len(), rows.ncols()));
            }
            let dots = rows * z;
            let q = spec.degree as i32;
            Ok(dots
                .iter()
                .zip(alpha.iter())
                .map(|(v, a)| (v + spec.offset).powi(q) * a)
                .sum())
        }
        KernelModel::Sketched { .. } => param_err("model is sketched; use sketched_kernel_predict"),
    }
}

/// Rank-`k` PCR on `ΦR`, with `R` the TensorSketch `ts`. With a nonzero
/// offset, `ts` must act on `d + 1` inputs.
pub fn sketched_kernel_pcr(
    a: &DenseMatrix,
    b: &DenseVector,
    k: usize,
    ts: &SketchOperator,
    spec: KernelSpec,
) -> Result<KernelModel> {
    if ts.kind() != SketchKind::TensorSketch || ts.degree() != spec.degree {
        return param_err("expected a TensorSketch of the kernel's degree");
    }
    if ts.in_dim() != spec.feature_input_dim(a.ncols()) {
        return dim_err(format!(
            "TensorSketch input {} for {} augmented features",
            ts.in_dim(),
            spec.feature_input_dim(a.ncols())
        ));
    }
    if b.len() != a.nrows() {
        return dim_err(format!("response of length {} for {} rows", b.len(), a.nrows()));
    }
    let phi_r = ts.tensorsketch_apply_rows(&DataMatrix::Dense(spec.augment_rows(a)))?;
    let gamma = reduced_pcr(&phi_r, b, k)?;
    Ok(KernelModel::Sketched {
        sketch: ts.clone(),
        gamma,
        spec,
        k,
    })
}

/// `⟨Rᵀφ(z), γ⟩`.
pub fn sketched_kernel_predict(model: &KernelModel, z: &DenseVector) -> Result<f64> {
    match model {
        KernelModel::Sketched {
            sketch, gamma, spec, ..
        } => {
            let img = sketch.tensorsketch_apply(&spec.augment(z.as_slice()))?;
            Ok(img.dot(gamma))
        }
        KernelModel::Exact { .. } => param_err("model is exact; use kernel_predict"),
    }
}
