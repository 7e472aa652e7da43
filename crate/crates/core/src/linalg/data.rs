use std::borrow::Cow;

use crate::error::{dim_err, Result};

use super::dense::{DenseMatrix, DenseVector};
use super::sparse::SparseMatrix;

/// A data matrix in either storage format.
#[derive(Debug, Clone)]
pub enum DataMatrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl From<DenseMatrix> for DataMatrix {
    fn from(m: DenseMatrix) -> Self {
        DataMatrix::Dense(m)
    }
}

impl From<SparseMatrix> for DataMatrix {
    fn from(m: SparseMatrix) -> Self {
        DataMatrix::Sparse(m)
    }
}

impl DataMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            DataMatrix::Dense(m) => m.nrows(),
            DataMatrix::Sparse(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            DataMatrix::Dense(m) => m.ncols(),
            DataMatrix::Sparse(m) => m.ncols(),
        }
    }

    /// Stored entries; every entry for dense storage.
    pub fn nnz(&self) -> usize {
        match self {
            DataMatrix::Dense(m) => m.len(),
            DataMatrix::Sparse(m) => m.nnz(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, DataMatrix::Sparse(_))
    }

    pub fn to_dense(&self) -> Cow<'_, DenseMatrix> {
        match self {
            DataMatrix::Dense(m) => Cow::Borrowed(m),
            DataMatrix::Sparse(m) => Cow::Owned(m.to_dense()),
        }
    }

    pub fn mul_vec(&self, x: &DenseVector) -> Result<DenseVector> {
        match self {
            DataMatrix::Dense(m) => {
                if x.len() != m.ncols() {
                    return dim_err(format!("vector of length {} for {} columns", x.len(), m.ncols()));
                }
                Ok(m * x)
            }
            DataMatrix::Sparse(m) => m.mul_vec(x),
        }
    }

    pub fn tr_mul_vec(&self, y: &DenseVector) -> Result<DenseVector> {
        match self {
            DataMatrix::Dense(m) => {
                if y.len() != m.nrows() {
                    return dim_err(format!("vector of length {} for {} rows", y.len(), m.nrows()));
                }
                Ok(m.tr_mul(y))
            }
            DataMatrix::Sparse(m) => m.tr_mul_vec(y),
        }
    }

    /// `self · m`.
    pub fn mul_dense(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            DataMatrix::Dense(a) => {
                if a.ncols() != m.nrows() {
                    return dim_err(format!("{}x{} times {}x{}", a.nrows(), a.ncols(), m.nrows(), m.ncols()));
                }
                Ok(a * m)
            }
            DataMatrix::Sparse(a) => a.mul_dense(m),
        }
    }

    /// Visits the entries of row `i` in increasing column order; dense storage
    /// visits every column.
    pub fn for_each_in_row(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        match self {
            DataMatrix::Dense(m) => {
                for j in 0..m.ncols() {
                    f(j, m[(i, j)]);
                }
            }
            DataMatrix::Sparse(m) => {
                for (j, v) in m.row(i) {
                    f(j, v);
                }
            }
        }
    }

    /// Row `i` as a dense vector.
    pub fn row_dense(&self, i: usize) -> DenseVector {
        let mut out = DenseVector::zeros(self.ncols());
        self.for_each_in_row(i, |j, v| out[j] = v);
        out
    }
}
