use nalgebra::SVD;

use crate::error::{dim_err, PcrError, Result};

use super::dense::{check_finite, gram, DenseMatrix, DenseVector};
use super::spectral::{ensure_gap, symmetric_eigen_desc};

/// Singular values at or below this are treated as zero by pseudo-inverses.
pub fn rank_tolerance(sigma_max: f64, rows: usize, cols: usize) -> f64 {
    sigma_max * rows.max(cols) as f64 * f64::EPSILON
}

/// Thin SVD `m = u diag(sigma) vᵀ` with `min(rows, cols)` triplets, sorted
/// nonincreasing, signs fixed so the largest-magnitude entry of each left
/// singular vector is positive.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DenseMatrix,
    pub sigma: DenseVector,
    pub v: DenseMatrix,
}

impl ThinSvd {
    pub fn rank(&self) -> usize {
        let tol = rank_tolerance(self.sigma_max(), self.u.nrows(), self.v.nrows());
        self.sigma.iter().filter(|&&s| s > tol).count()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.get(0).copied().unwrap_or(0.0)
    }

    /// Splits at `k` into leading and trailing blocks.
    pub fn truncate(&self, k: usize) -> Result<TruncatedSvd> {
        let r = self.sigma.len();
        if k == 0 || k > r {
            return dim_err(format!("split index {k} outside 1..={r}"));
        }
        Ok(TruncatedSvd {
            k,
            u_k: self.u.columns(0, k).into_owned(),
            sigma_k: self.sigma.rows(0, k).into_owned(),
            v_k: self.v.columns(0, k).into_owned(),
            u_kplus: self.u.columns(k, r - k).into_owned(),
            sigma_kplus: self.sigma.rows(k, r - k).into_owned(),
            v_kplus: self.v.columns(k, r - k).into_owned(),
        })
    }
}

/// Singular triplets split at `k` into `(U_k, Σ_k, V_k)` and complements.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub k: usize,
    pub u_k: DenseMatrix,
    pub sigma_k: DenseVector,
    pub v_k: DenseMatrix,
    pub u_kplus: DenseMatrix,
    pub sigma_kplus: DenseVector,
    pub v_kplus: DenseMatrix,
}

impl TruncatedSvd {
    /// All singular values, nonincreasing.
    pub fn singular_values(&self) -> Vec<f64> {
        self.sigma_k.iter().chain(self.sigma_kplus.iter()).copied().collect()
    }

    /// σ_{k+1}, or zero when the split is at the last triplet.
    pub fn sigma_next(&self) -> f64 {
        self.sigma_kplus.get(0).copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let head = &self.u_k * DenseMatrix::from_diagonal(&self.sigma_k) * self.v_k.transpose();
        if self.sigma_kplus.is_empty() {
            return head;
        }
        head + &self.u_kplus * DenseMatrix::from_diagonal(&self.sigma_kplus) * self.v_kplus.transpose()
    }
}

fn fix_sign_by_column(primary: &mut DenseMatrix, partner: Option<&mut DenseMatrix>) {
    let mut flips = Vec::with_capacity(primary.ncols());
    for j in 0..primary.ncols() {
        let col = primary.column(j);
        let mut best = 0usize;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        flips.push(!col.is_empty() && col[best] < 0.0);
    }
    for (j, &flip) in flips.iter().enumerate() {
        if flip {
            primary.column_mut(j).neg_mut();
        }
    }
    if let Some(p) = partner {
        for (j, &flip) in flips.iter().enumerate() {
            if flip {
                p.column_mut(j).neg_mut();
            }
        }
    }
}

/// Full thin SVD with sorted values and deterministic signs.
pub fn full_svd(m: &DenseMatrix) -> Result<ThinSvd> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return dim_err("empty matrix");
    }
    check_finite(m)?;
    let r = m.nrows().min(m.ncols());
    let max_iter = 10_000 + 200 * r;
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, max_iter)
        .ok_or_else(|| PcrError::Convergence(format!("SVD of {}x{}", m.nrows(), m.ncols())))?;
    let u_raw = svd.u.expect("requested U");
    let vt_raw = svd.v_t.expect("requested Vᵀ");
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut u = DenseMatrix::zeros(m.nrows(), r);
    let mut v = DenseMatrix::zeros(m.ncols(), r);
    let mut sigma = DenseVector::zeros(r);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u_raw.column(src));
        v.set_column(dst, &vt_raw.row(src).transpose());
        sigma[dst] = svd.singular_values[src];
    }
    fix_sign_by_column(&mut u, Some(&mut v));
    Ok(ThinSvd { u, sigma, v })
}

/// Thin SVD of `m` split at `k`.
pub fn thin_svd(m: &DenseMatrix, k: usize) -> Result<TruncatedSvd> {
    let r = m.nrows().min(m.ncols());
    if k == 0 || k > r {
        return dim_err(format!("split index {k} outside 1..={r}"));
    }
    full_svd(m)?.truncate(k)
}

/// `m⁺ rhs` with the cutoff of [`rank_tolerance`].
pub fn pinv_solve(m: &DenseMatrix, rhs: &DenseVector) -> Result<DenseVector> {
    if rhs.len() != m.nrows() {
        return dim_err(format!("rhs of length {} for {} rows", rhs.len(), m.nrows()));
    }
    let svd = full_svd(m)?;
    Ok(pinv_apply(&svd, rhs, m.nrows(), m.ncols()))
}

pub(crate) fn pinv_apply(svd: &ThinSvd, rhs: &DenseVector, rows: usize, cols: usize) -> DenseVector {
    let tol = rank_tolerance(svd.sigma_max(), rows, cols);
    let mut coeff = svd.u.tr_mul(rhs);
    for (c, &s) in coeff.iter_mut().zip(svd.sigma.iter()) {
        *c = if s > tol { *c / s } else { 0.0 };
    }
    &svd.v * coeff
}

/// Least squares through Householder QR for a tall matrix of full column
/// rank; rank deficiency is an error rather than a silent cutoff.
pub fn lstsq_full_rank(m: &DenseMatrix, rhs: &DenseVector) -> Result<DenseVector> {
    let (rows, cols) = m.shape();
    if rhs.len() != rows {
        return dim_err(format!("rhs of length {} for {rows} rows", rhs.len()));
    }
    if rows < cols {
        return Err(PcrError::RankDeficient(format!(
            "{rows}x{cols} cannot have full column rank"
        )));
    }
    let qr = m.clone().qr();
    let r = qr.r();
    let diag_max = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let tol = diag_max * rows as f64 * f64::EPSILON;
    if (0..cols).any(|i| r[(i, i)].abs() <= tol) {
        return Err(PcrError::RankDeficient(
            "triangular factor has a negligible pivot".into(),
        ));
    }
    let mut qtb = rhs.clone();
    qr.q_tr_mul(&mut qtb);
    let head = qtb.rows(0, cols).into_owned();
    r.solve_upper_triangular(&head)
        .ok_or_else(|| PcrError::RankDeficient("singular triangular factor".into()))
}

/// Top-`k` right singular subspace together with the singular values it was
/// split from.
#[derive(Debug, Clone)]
pub struct RightBasis {
    pub v_k: DenseMatrix,
    pub sigma: Vec<f64>,
}

/// Top-`k` right singular vectors of `m`, after verifying rank and eigengap at
/// `k`. Tall inputs go through the `d×d` Gram eigenproblem.
pub fn dominant_right_basis(m: &DenseMatrix, k: usize) -> Result<RightBasis> {
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    if k == 0 || k > r {
        return dim_err(format!("rank {k} outside 1..={r}"));
    }
    if rows >= 2 * cols {
        check_finite(m)?;
        let eig = symmetric_eigen_desc(&gram(m))?;
        let sigma: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
        ensure_gap(&sigma, k, rows, cols)?;
        let mut v_k = eig.vectors.columns(0, k).into_owned();
        fix_sign_by_column(&mut v_k, None);
        Ok(RightBasis { v_k, sigma })
    } else {
        let svd = full_svd(m)?;
        let sigma: Vec<f64> = svd.sigma.iter().copied().collect();
        ensure_gap(&sigma, k, rows, cols)?;
        Ok(RightBasis {
            v_k: svd.v.columns(0, k).into_owned(),
            sigma,
        })
    }
}
