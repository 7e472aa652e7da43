use std::fmt;
use std::time::{Duration, Instant};

use crate::error::{dim_err, PcrError, Result};
use crate::linalg::{check_finite, DataMatrix, DenseVector};

/// Least squares restricted to rank `k`: data `a` (n×d), response `b`.
#[derive(Debug, Clone)]
pub struct PcrProblem {
    a: DataMatrix,
    b: DenseVector,
    k: usize,
}

impl PcrProblem {
    pub fn new(a: impl Into<DataMatrix>, b: DenseVector, k: usize) -> Result<Self> {
        let a = a.into();
        let (n, d) = (a.nrows(), a.ncols());
        if b.len() != n {
            return dim_err(format!("response of length {} for {n} rows", b.len()));
        }
        if k == 0 || k > n.min(d) {
            return dim_err(format!("rank {k} outside 1..={}", n.min(d)));
        }
        if let DataMatrix::Dense(m) = &a {
            check_finite(m)?;
        }
        if let Some(i) = b.iter().position(|v| !v.is_finite()) {
            return Err(PcrError::NonFinite { row: i, col: 0 });
        }
        Ok(Self { a, b, k })
    }

    pub fn a(&self) -> &DataMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseVector {
        &self.b
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }

    /// The same data at a different rank.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), k)
    }

    /// `‖Ax − b‖₂`.
    pub fn objective(&self, x: &DenseVector) -> Result<f64> {
        Ok((self.a.mul_vec(x)? - &self.b).norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Exact,
    Ols,
    Sketched,
    Cls,
    Left,
    Right,
    TwoSided,
    InputSparsity,
    Streaming,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Ols => "ols",
            Method::Sketched => "sketched",
            Method::Cls => "cls",
            Method::Left => "left",
            Method::Right => "right",
            Method::TwoSided => "twosided",
            Method::InputSparsity => "input-sparsity",
            Method::Streaming => "stream",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    /// `‖Ax − b‖₂`.
    pub objective: f64,
    /// `‖V_{A,k+}ᵀx‖₂`, present only when an exact SVD of `A` was computed.
    pub constraint_norm: Option<f64>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct PcrSolution {
    pub x: DenseVector,
    pub method: Method,
    /// Columns of the compression matrix `R`; 0 for the exact solver.
    pub r_cols: usize,
    pub diagnostics: Diagnostics,
}

impl PcrSolution {
    pub(crate) fn assemble(
        p: &PcrProblem,
        x: DenseVector,
        method: Method,
        r_cols: usize,
        started: Instant,
    ) -> Result<Self> {
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(PcrError::NonFinite { row: i, col: 0 });
        }
        let elapsed = started.elapsed();
        let objective = p.objective(&x)?;
        Ok(Self {
            x,
            method,
            r_cols,
            diagnostics: Diagnostics {
                objective,
                constraint_norm: None,
                elapsed,
            },
        })
    }
}
