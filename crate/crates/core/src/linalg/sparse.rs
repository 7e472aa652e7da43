use crate::error::{dim_err, PcrError, Result};

use super::dense::{DenseMatrix, DenseVector};

/// Compressed sparse row matrix. Column indices within a row are strictly
/// increasing; explicit zeros are allowed but never created by this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets in any order. Duplicate
    /// coordinates and non-finite values are rejected.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, v) in &triplets {
            if i >= nrows || j >= ncols {
                return dim_err(format!("entry ({i}, {j}) outside {nrows}x{ncols}"));
            }
            if !v.is_finite() {
                return Err(PcrError::NonFinite { row: i, col: j });
            }
        }
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        for w in triplets.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(PcrError::InvalidParameter(format!(
                    "duplicate entry ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        let mut row_ptr = vec![0usize; nrows + 1];
        for &(i, _, _) in &triplets {
            row_ptr[i + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = triplets.iter().map(|t| t.1).collect();
        let values = triplets.iter().map(|t| t.2).collect();
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Drops exact zeros of a dense matrix.
    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut triplets = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), triplets).expect("dense input is consistent")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `i` as `(col, value)` in increasing column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            out[(i, j)] = v;
        }
        out
    }

    pub fn mul_vec(&self, x: &DenseVector) -> Result<DenseVector> {
        if x.len() != self.ncols {
            return dim_err(format!("vector of length {} for {} columns", x.len(), self.ncols));
        }
        Ok(DenseVector::from_fn(self.nrows, |i, _| {
            self.row(i).map(|(j, v)| v * x[j]).sum()
        }))
    }

    pub fn tr_mul_vec(&self, y: &DenseVector) -> Result<DenseVector> {
        if y.len() != self.nrows {
            return dim_err(format!("vector of length {} for {} rows", y.len(), self.nrows));
        }
        let mut out = DenseVector::zeros(self.ncols);
        for (i, j, v) in self.triplets() {
            out[j] += v * y[i];
        }
        Ok(out)
    }

    /// `self · m` for a dense right factor.
    pub fn mul_dense(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        if m.nrows() != self.ncols {
            return dim_err(format!(
                "{}x{} times {}x{}",
                self.nrows,
                self.ncols,
                m.nrows(),
                m.ncols()
            ));
        }
        let mut out = DenseMatrix::zeros(self.nrows, m.ncols());
        for c in 0..m.ncols() {
            let col = m.column(c);
            for i in 0..self.nrows {
                out[(i, c)] = self.row(i).map(|(j, v)| v * col[j]).sum();
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> SparseMatrix {
        SparseMatrix::from_triplets(2, 3, vec![(1, 1, 1.0), (0, 2, 4.0), (0, 0, 2.0)]).unwrap()
    }

    #[test]
    fn rows_sorted() {
        let s = example();
        assert_eq!(s.row(0).collect::<Vec<_>>(), vec![(0, 2.0), (2, 4.0)]);
        assert_eq!(s.nnz(), 3);
    }

    #[test]
    fn products_match_dense() {
        let s = example();
        let d = s.to_dense();
        let x = DenseVector::from_vec(vec![1.0, -2.0, 0.5]);
        let y = DenseVector::from_vec(vec![3.0, -1.0]);
        assert_eq!(s.mul_vec(&x).unwrap(), &d * &x);
        assert_eq!(s.tr_mul_vec(&y).unwrap(), d.tr_mul(&y));
        let m = DenseMatrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64);
        assert_eq!(s.mul_dense(&m).unwrap(), &d * &m);
    }

    #[test]
    fn duplicates_and_bounds_rejected() {
        assert!(SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, vec![(0, 0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn dense_round_trip() {
        let s = example();
        assert_eq!(SparseMatrix::from_dense(&s.to_dense()), s);
    }
}
