use crate::error::{dim_err, param_err, PcrError, Result};

use super::dense::{check_finite, DenseMatrix, DenseVector};
use super::svd::rank_tolerance;

/// Solvers reject a split whose relative gap falls below this.
pub const GAP_TOLERANCE: f64 = 1e-12;

fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return dim_err("empty matrix");
    }
    check_finite(m)?;
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Largest singular value.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(m)?[0])
}

/// `‖m‖_F² / ‖m‖₂²`.
pub fn stable_rank(m: &DenseMatrix) -> Result<f64> {
    let s = singular_values(m)?;
    if s[0] == 0.0 {
        return param_err("stable rank of the zero matrix");
    }
    let fro2: f64 = s.iter().map(|x| x * x).sum();
    Ok(fro2 / (s[0] * s[0]))
}

/// `(σ_k² − σ_{k+1}²) / σ₁²` from a nonincreasing list; σ past the end is zero.
pub fn relative_gap_from_values(sigma: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > sigma.len() {
        return dim_err(format!("gap index {k} outside 1..={}", sigma.len()));
    }
    let s1 = sigma[0];
    if s1 <= 0.0 {
        return param_err("relative gap of the zero matrix");
    }
    let next = sigma.get(k).copied().unwrap_or(0.0);
    Ok((sigma[k - 1].powi(2) - next.powi(2)) / (s1 * s1))
}

/// Relative gap of `m` at `k`, for `1 ≤ k < min(rows, cols)`.
pub fn relative_gap(m: &DenseMatrix, k: usize) -> Result<f64> {
    let r = m.nrows().min(m.ncols());
    if k == 0 || k >= r {
        return dim_err(format!("gap index {k} outside 1..{r}"));
    }
    relative_gap_from_values(&singular_values(m)?, k)
}

/// Checks that the first `k` singular values are numerically nonzero and
/// separated from the rest.
pub fn ensure_gap(sigma: &[f64], k: usize, rows: usize, cols: usize) -> Result<()> {
    if k == 0 || k > sigma.len() {
        return dim_err(format!("rank {k} outside 1..={}", sigma.len()));
    }
    let tol = rank_tolerance(sigma[0], rows, cols);
    if sigma[0] <= 0.0 || sigma[k - 1] <= tol {
        return Err(PcrError::RankDeficient(format!(
            "σ_{k} = {:e} at or below tolerance {tol:e}",
            sigma[k - 1]
        )));
    }
    let gap = relative_gap_from_values(sigma, k)?;
    if gap < GAP_TOLERANCE {
        return Err(PcrError::GapIsZero { k, gap });
    }
    Ok(())
}

/// Eigendecomposition of a symmetric matrix with eigenvalues nonincreasing.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: DenseVector,
    pub vectors: DenseMatrix,
}

pub fn symmetric_eigen_desc(m: &DenseMatrix) -> Result<SymmetricEigen> {
    if !m.is_square() || m.nrows() == 0 {
        return dim_err(format!("{}x{} is not a nonempty square matrix", m.nrows(), m.ncols()));
    }
    check_finite(m)?;
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut values = DenseVector::zeros(n);
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = eig.eigenvalues[src];
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Spectral norm of a symmetric matrix as its largest absolute eigenvalue.
pub fn symmetric_spectral_norm(m: &DenseMatrix) -> Result<f64> {
    let eig = symmetric_eigen_desc(m)?;
    Ok(eig.values.iter().fold(0.0f64, |a, &l| a.max(l.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> DenseMatrix {
        DenseMatrix::from_diagonal(&DenseVector::from_column_slice(v))
    }

    #[test]
    fn stable_rank_examples() {
        assert!((stable_rank(&DenseMatrix::identity(5, 5)).unwrap() - 5.0).abs() < 1e-12);
        assert!((stable_rank(&diag(&[2.0, 1.0])).unwrap() - 1.25).abs() < 1e-12);
        let u = DenseVector::from_vec(vec![1.0, 2.0, 3.0]);
        let v = DenseVector::from_vec(vec![-1.0, 0.5]);
        assert!((stable_rank(&(&u * v.transpose())).unwrap() - 1.0).abs() < 1e-12);
        assert!(stable_rank(&DenseMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn relative_gap_examples() {
        assert!((relative_gap(&diag(&[3.0, 2.0, 1.0]), 1).unwrap() - 5.0 / 9.0).abs() < 1e-15);
        assert_eq!(relative_gap(&DenseMatrix::identity(4, 4), 2).unwrap(), 0.0);
        assert!(relative_gap(&diag(&[3.0, 2.0, 1.0]), 3).is_err());
    }

    #[test]
    fn gap_check() {
        assert!(matches!(
            ensure_gap(&[1.0, 1.0, 0.5], 1, 3, 3),
            Err(PcrError::GapIsZero { k: 1, .. })
        ));
        assert!(matches!(
            ensure_gap(&[1.0, 0.0], 2, 2, 2),
            Err(PcrError::RankDeficient(_))
        ));
        assert!(ensure_gap(&[1.0, 0.5], 2, 2, 2).is_ok());
    }

    #[test]
    fn eigen_sorted() {
        let e = symmetric_eigen_desc(&diag(&[1.0, 3.0, -2.0])).unwrap();
        assert_eq!(e.values.as_slice(), &[3.0, 1.0, -2.0]);
        assert_eq!(symmetric_spectral_norm(&diag(&[1.0, -4.0])).unwrap(), 4.0);
    }
}
