use crate::error::{dim_err, PcrError, Result};

use super::dense::{check_finite, DenseMatrix, DenseVector};

/// Orthonormality is accepted when `‖QᵀQ − I‖_F` is at most this.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-10;

/// A matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis(DenseMatrix);

impl OrthonormalBasis {
    pub fn new(q: DenseMatrix) -> Result<Self> {
        if q.ncols() == 0 || q.ncols() > q.nrows() {
            return dim_err(format!("{}x{} cannot have orthonormal columns", q.nrows(), q.ncols()));
        }
        check_finite(&q)?;
        let defect = (q.tr_mul(&q) - DenseMatrix::identity(q.ncols(), q.ncols())).norm();
        if defect > ORTHONORMAL_TOLERANCE {
            return Err(PcrError::InvalidParameter(format!(
                "columns are not orthonormal (defect {defect:e})"
            )));
        }
        Ok(Self(q))
    }

    /// Orthonormal basis for the column space of a full-column-rank matrix.
    pub fn orthonormalize(m: &DenseMatrix) -> Result<Self> {
        if m.ncols() == 0 || m.ncols() > m.nrows() {
            return dim_err(format!("{}x{} cannot have full column rank", m.nrows(), m.ncols()));
        }
        check_finite(m)?;
        let qr = m.clone().qr();
        let r = qr.r();
        let scale = (0..m.ncols()).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
        if (0..m.ncols()).any(|i| r[(i, i)].abs() <= scale * 1e-12) {
            return Err(PcrError::RankDeficient("columns are linearly dependent".into()));
        }
        Self::new(qr.q())
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_inner(self) -> DenseMatrix {
        self.0
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn projector(&self) -> DenseMatrix {
        &self.0 * self.0.transpose()
    }
}

/// `Q Qᵀ v`.
pub fn project(basis: &OrthonormalBasis, v: &DenseVector) -> Result<DenseVector> {
    if v.len() != basis.ambient_dim() {
        return dim_err(format!(
            "vector of length {} in ambient dimension {}",
            v.len(),
            basis.ambient_dim()
        ));
    }
    let q = basis.matrix();
    Ok(q * q.tr_mul(v))
}

/// Cosines of the principal angles, nonincreasing.
pub fn principal_cosines(u: &OrthonormalBasis, w: &OrthonormalBasis) -> Result<DenseVector> {
    if u.ambient_dim() != w.ambient_dim() {
        return dim_err("bases live in different ambient spaces");
    }
    let mut s: Vec<f64> = u
        .matrix()
        .tr_mul(w.matrix())
        .singular_values()
        .iter()
        .map(|c| c.min(1.0))
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(DenseVector::from_vec(s))
}

fn residual_norm(u: &DenseMatrix, w: &DenseMatrix) -> f64 {
    let resid = w - u * u.tr_mul(w);
    resid.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Sine of the largest principal angle between equal-dimension subspaces.
///
/// Evaluated as `‖(I − UUᵀ)W‖₂`, which keeps full relative accuracy for
/// nearly aligned subspaces.
pub fn subspace_distance(u: &OrthonormalBasis, w: &OrthonormalBasis) -> Result<f64> {
    if u.ambient_dim() != w.ambient_dim() {
        return dim_err("bases live in different ambient spaces");
    }
    if u.dim() != w.dim() {
        return dim_err(format!("subspace dimensions differ ({} vs {})", u.dim(), w.dim()));
    }
    let a = residual_norm(u.matrix(), w.matrix());
    let b = residual_norm(w.matrix(), u.matrix());
    Ok(a.max(b).min(1.0))
}

/// `‖(W_{k+}ᵀQ)(W_kᵀQ)⁺‖₂`, the spectral norm of the tangent of the principal
/// angles between `range(Q)` and `range(W_k)`.
pub fn tan_theta_norm(q: &OrthonormalBasis, w_k: &OrthonormalBasis, w_kplus: &OrthonormalBasis) -> Result<f64> {
    let n = q.ambient_dim();
    if w_k.ambient_dim() != n || w_kplus.ambient_dim() != n {
        return dim_err("bases live in different ambient spaces");
    }
    let k = w_k.dim();
    if q.dim() < k {
        return Err(PcrError::RankDeficient(format!(
            "W_kᵀQ is {k}x{} and cannot have rank {k}",
            q.dim()
        )));
    }
    let head = w_k.matrix().tr_mul(q.matrix());
    let tail = w_kplus.matrix().tr_mul(q.matrix());
    let svd = head.clone().svd(true, true);
    let sigma = &svd.singular_values;
    if sigma.iter().any(|&s| s <= 1e-12) {
        return Err(PcrError::RankDeficient(format!("W_kᵀQ has rank below {k}")));
    }
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vᵀ");
    let mut scaled = u.transpose();
    for (i, &s) in sigma.iter().enumerate() {
        scaled.row_mut(i).scale_mut(1.0 / s);
    }
    let pinv = vt.transpose() * scaled;
    let prod = tail * pinv;
    Ok(prod.singular_values().iter().copied().fold(0.0, f64::max))
}
