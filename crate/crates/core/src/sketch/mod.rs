//! Seeded random sketching operators.
//!
//! Every operator is a pure function of its kind, dimensions and seed.
//! Subgaussian column `j` is drawn from ChaCha stream `j`, and CountSketch
//! column `j` is obtained by hashing `j`, so any column can be regenerated on
//! its own. The streaming estimator relies on this.

mod gram;
mod hashing;
mod tensor;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{dim_err, param_err, PcrError, Result};
use crate::linalg::{DataMatrix, DenseMatrix, DenseVector};

pub use gram::{gram_error, sketch_rows_for_gram, sketch_rows_for_gram_with, GramErrorReport, DEFAULT_GRAM_CONSTANT};
pub use hashing::{HashPair, PolyHash, MERSENNE_61};
pub use tensor::{explicit_feature_map, FFT_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SketchKind {
    Subgaussian,
    CountSketch,
    TensorSketch,
}

impl std::fmt::Display for SketchKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SketchKind::Subgaussian => "subgaussian",
            SketchKind::CountSketch => "countsketch",
            SketchKind::TensorSketch => "tensorsketch",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Payload {
    Dense(DenseMatrix),
    Hashed { rows: Vec<usize>, signs: Vec<f64> },
    Tensor(tensor::TensorTables),
}

/// A seeded random linear map from `ℝ^in_dim` to `ℝ^out_dim`.
///
/// For TensorSketch, `in_dim` is the dimension `d` of the data vector; the
/// implicit map acts on the `d^q`-dimensional tensor power.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchOperator {
    kind: SketchKind,
    out_dim: usize,
    in_dim: usize,
    seed: Option<u64>,
    payload: Payload,
}

fn check_dims(out_dim: usize, in_dim: usize) -> Result<()> {
    if out_dim == 0 || in_dim == 0 {
        return param_err(format!("sketch dimensions must be positive, got {out_dim}x{in_dim}"));
    }
    Ok(())
}

/// Mixes a salt into a seed (SplitMix64 finalizer) so that sketches drawn for
/// different roles from one user seed are independent.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Column `j` of a subgaussian sketch with `out_dim` rows, scaled by
/// `1/√out_dim`.
pub fn subgaussian_column(seed: u64, out_dim: usize, j: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j);
    let scale = 1.0 / (out_dim as f64).sqrt();
    (0..out_dim)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Target row and sign of column `j` of a CountSketch with `out_dim` rows.
pub fn countsketch_entry(hash: &HashPair, out_dim: usize, j: u64) -> (usize, f64) {
    (hash.bucket(j, out_dim), hash.sign(j))
}

/// Dense sketch with i.i.d. `N(0, 1/out_dim)` entries.
pub fn gen_subgaussian(out_dim: usize, in_dim: usize, seed: u64) -> Result<SketchOperator> {
    SketchOperator::subgaussian(out_dim, in_dim, seed)
}

/// Sparse embedding with one random ±1 per column.
pub fn gen_countsketch(out_dim: usize, in_dim: usize, seed: u64) -> Result<SketchOperator> {
    SketchOperator::countsketch(out_dim, in_dim, seed)
}

/// Implicit CountSketch of the degree-`q` tensor power of `ℝ^d`.
pub fn gen_tensorsketch(q: usize, in_dim: usize, out_dim: usize, seed: u64) -> Result<SketchOperator> {
    SketchOperator::tensorsketch(q, in_dim, out_dim, seed)
}

impl SketchOperator {
    pub fn subgaussian(out_dim: usize, in_dim: usize, seed: u64) -> Result<Self> {
        check_dims(out_dim, in_dim)?;
        let mut m = DenseMatrix::zeros(out_dim, in_dim);
        for j in 0..in_dim {
            let col = subgaussian_column(seed, out_dim, j as u64);
            m.column_mut(j).copy_from_slice(&col);
        }
        Ok(Self {
            kind: SketchKind::Subgaussian,
            out_dim,
            in_dim,
            seed: Some(seed),
            payload: Payload::Dense(m),
        })
    }

    pub fn countsketch(out_dim: usize, in_dim: usize, seed: u64) -> Result<Self> {
        check_dims(out_dim, in_dim)?;
        let hash = HashPair::derive(seed, 0);
        let (rows, signs) = (0..in_dim as u64).map(|j| countsketch_entry(&hash, out_dim, j)).unzip();
        Ok(Self {
            kind: SketchKind::CountSketch,
            out_dim,
            in_dim,
            seed: Some(seed),
            payload: Payload::Hashed { rows, signs },
        })
    }

    pub fn tensorsketch(q: usize, in_dim: usize, out_dim: usize, seed: u64) -> Result<Self> {
        if q == 0 {
            return param_err("TensorSketch degree must be at least 1");
        }
        check_dims(out_dim, in_dim)?;
        Ok(Self {
            kind: SketchKind::TensorSketch,
            out_dim,
            in_dim,
            seed: Some(seed),
            payload: Payload::Tensor(tensor::TensorTables::derive(q, in_dim, out_dim, seed)),
        })
    }

    /// CountSketch with explicitly chosen target rows and signs.
    pub fn countsketch_from_parts(out_dim: usize, rows: Vec<usize>, signs: Vec<f64>) -> Result<Self> {
        check_dims(out_dim, rows.len())?;
        if rows.len() != signs.len() {
            return dim_err("row and sign tables differ in length");
        }
        if rows.iter().any(|&r| r >= out_dim) {
            return dim_err("target row outside the sketch");
        }
        if signs.iter().any(|&s| s != 1.0 && s != -1.0) {
            return param_err("CountSketch signs must be ±1");
        }
        Ok(Self {
            kind: SketchKind::CountSketch,
            out_dim,
            in_dim: rows.len(),
            seed: None,
            payload: Payload::Hashed { rows, signs },
        })
    }

    /// The `n×n` identity as a degenerate CountSketch.
    pub fn identity(n: usize) -> Result<Self> {
        Self::countsketch_from_parts(n, (0..n).collect(), vec![1.0; n])
    }

    pub fn kind(&self) -> SketchKind {
        self.kind
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    /// `None` for operators assembled from explicit parts.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// TensorSketch degree; 1 for the other kinds.
    pub fn degree(&self) -> usize {
        match &self.payload {
            Payload::Tensor(t) => t.degree(),
            _ => 1,
        }
    }

    /// CountSketch target rows and signs.
    pub fn hash_tables(&self) -> Option<(&[usize], &[f64])> {
        match &self.payload {
            Payload::Hashed { rows, signs } => Some((rows, signs)),
            _ => None,
        }
    }

    /// Bucket and sign tables `(h_j, g_j)` of TensorSketch factor `j`.
    pub fn tensor_factor(&self, j: usize) -> Option<(&[usize], &[f64])> {
        match &self.payload {
            Payload::Tensor(t) => t.factor(j),
            _ => None,
        }
    }

    fn not_tensor(&self) -> Result<()> {
        if self.kind == SketchKind::TensorSketch {
            return param_err("TensorSketch acts on feature maps; use tensorsketch_apply");
        }
        Ok(())
    }

    /// Dense `out_dim × in_dim` matrix. For TensorSketch this is `Rᵀ`, of size
    /// `t × d^q`, with tuples ordered lexicographically.
    pub fn materialize(&self) -> DenseMatrix {
        match &self.payload {
            Payload::Dense(m) => m.clone(),
            Payload::Hashed { rows, signs } => {
                let mut m = DenseMatrix::zeros(self.out_dim, self.in_dim);
                for (j, (&r, &s)) in rows.iter().zip(signs).enumerate() {
                    m[(r, j)] = s;
                }
                m
            }
            Payload::Tensor(t) => t.materialize_transpose(),
        }
    }

    pub fn apply_vec(&self, v: &DenseVector) -> Result<DenseVector> {
        self.not_tensor()?;
        if v.len() != self.in_dim {
            return dim_err(format!("vector of length {} for sketch input {}", v.len(), self.in_dim));
        }
        match &self.payload {
            Payload::Dense(m) => Ok(m * v),
            Payload::Hashed { rows, signs } => {
                let mut out = DenseVector::zeros(self.out_dim);
                for (i, (&r, &s)) in rows.iter().zip(signs).enumerate() {
                    out[r] += s * v[i];
                }
                Ok(out)
            }
            Payload::Tensor(_) => unreachable!(),
        }
    }

    /// `S·A`.
    pub fn apply_left(&self, a: &DataMatrix) -> Result<DenseMatrix> {
        self.apply_left_counted(a).map(|(m, _)| m)
    }

    /// `S·A` together with the number of entries of `A` read. For CountSketch
    /// the count equals `nnz(A)`.
    pub fn apply_left_counted(&self, a: &DataMatrix) -> Result<(DenseMatrix, usize)> {
        self.not_tensor()?;
        if a.nrows() != self.in_dim {
            return dim_err(format!("sketch input {} applied to {} rows", self.in_dim, a.nrows()));
        }
        let d = a.ncols();
        match &self.payload {
            Payload::Dense(s) => match a {
                DataMatrix::Dense(m) => Ok((s * m, m.len())),
                DataMatrix::Sparse(m) => {
                    let mut out = DenseMatrix::zeros(self.out_dim, d);
                    let mut touched = 0;
                    for (i, j, v) in m.triplets() {
                        out.column_mut(j).axpy(v, &s.column(i), 1.0);
                        touched += 1;
                    }
                    Ok((out, touched))
                }
            },
            Payload::Hashed { rows, signs } => {
                let mut out = DenseMatrix::zeros(self.out_dim, d);
                let mut touched = 0;
                for i in 0..a.nrows() {
                    let (r, s) = (rows[i], signs[i]);
                    a.for_each_in_row(i, |j, v| {
                        out[(r, j)] += s * v;
                        touched += 1;
                    });
                }
                Ok((out, touched))
            }
            Payload::Tensor(_) => unreachable!(),
        }
    }

    /// The same operator with all-zero rows removed; rows keep their relative
    /// order. Only CountSketch can have zero rows.
    pub fn compact(&self) -> SketchOperator {
        match &self.payload {
            Payload::Hashed { rows, signs } => {
                let used: BTreeMap<usize, usize> = {
                    let mut seen: Vec<usize> = rows.clone();
                    seen.sort_unstable();
                    seen.dedup();
                    seen.into_iter().enumerate().map(|(new, old)| (old, new)).collect()
                };
                Self {
                    kind: self.kind,
                    out_dim: used.len(),
                    in_dim: self.in_dim,
                    seed: self.seed,
                    payload: Payload::Hashed {
                        rows: rows.iter().map(|r| used[r]).collect(),
                        signs: signs.clone(),
                    },
                }
            }
            _ => self.clone(),
        }
    }

    /// `S·A` restricted to the nonzero rows of `S`.
    pub fn apply_left_compact(&self, a: &DataMatrix) -> Result<DenseMatrix> {
        self.compact().apply_left(a)
    }

    /// `A·Gᵀ` for `G = self`, reading each stored entry of `A` once for
    /// CountSketch.
    pub fn apply_right_transpose(&self, a: &DataMatrix) -> Result<DenseMatrix> {
        self.not_tensor()?;
        if a.ncols() != self.in_dim {
            return dim_err(format!("sketch input {} applied to {} columns", self.in_dim, a.ncols()));
        }
        match &self.payload {
            Payload::Dense(g) => a.mul_dense(&g.transpose()),
            Payload::Hashed { rows, signs } => {
                let mut out = DenseMatrix::zeros(a.nrows(), self.out_dim);
                for i in 0..a.nrows() {
                    a.for_each_in_row(i, |j, v| out[(i, rows[j])] += signs[j] * v);
                }
                Ok(out)
            }
            Payload::Tensor(_) => unreachable!(),
        }
    }

    /// `Gᵀ·m` for an `out_dim × c` matrix.
    pub fn apply_transpose(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        self.not_tensor()?;
        if m.nrows() != self.out_dim {
            return dim_err(format!("sketch output {} vs {} rows", self.out_dim, m.nrows()));
        }
        match &self.payload {
            Payload::Dense(g) => Ok(g.tr_mul(m)),
            Payload::Hashed { rows, signs } => {
                let mut out = DenseMatrix::zeros(self.in_dim, m.ncols());
                for (j, (&r, &s)) in rows.iter().zip(signs).enumerate() {
                    for c in 0..m.ncols() {
                        out[(j, c)] = s * m[(r, c)];
                    }
                }
                Ok(out)
            }
            Payload::Tensor(_) => unreachable!(),
        }
    }

    /// `GᵀG`, an `in_dim × in_dim` matrix.
    pub fn transpose_gram(&self) -> Result<DenseMatrix> {
        self.not_tensor()?;
        match &self.payload {
            Payload::Dense(g) => Ok(crate::linalg::dense_gram(g)),
            Payload::Hashed { rows, signs } => {
                let mut out = DenseMatrix::zeros(self.in_dim, self.in_dim);
                let mut by_row: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for (j, &r) in rows.iter().enumerate() {
                    by_row.entry(r).or_default().push(j);
                }
                for cols in by_row.values() {
                    for &a in cols {
                        for &b in cols {
                            out[(a, b)] = signs[a] * signs[b];
                        }
                    }
                }
                Ok(out)
            }
            Payload::Tensor(_) => unreachable!(),
        }
    }

    /// `Rᵀφ(z)` for TensorSketch.
    pub fn tensorsketch_apply(&self, z: &DenseVector) -> Result<DenseVector> {
        match &self.payload {
            Payload::Tensor(t) => {
                if z.len() != self.in_dim {
                    return dim_err(format!(
                        "vector of length {} for TensorSketch input {}",
                        z.len(),
                        self.in_dim
                    ));
                }
                Ok(t.apply(
                    z.as_slice(),
                    &mut tensor::ConvolutionPlan::new(t.degree(), self.out_dim),
                ))
            }
            _ => Err(PcrError::InvalidParameter(format!(
                "{} is not a TensorSketch",
                self.kind
            ))),
        }
    }

    /// Row-wise `Rᵀφ(a_i)`, i.e. the `n × t` matrix `ΦR`.
    pub fn tensorsketch_apply_rows(&self, a: &DataMatrix) -> Result<DenseMatrix> {
        match &self.payload {
            Payload::Tensor(t) => {
                if a.ncols() != self.in_dim {
                    return dim_err(format!("{} columns for TensorSketch input {}", a.ncols(), self.in_dim));
                }
                let mut plan = tensor::ConvolutionPlan::new(t.degree(), self.out_dim);
                let mut out = DenseMatrix::zeros(a.nrows(), self.out_dim);
                for i in 0..a.nrows() {
                    let row = a.row_dense(i);
                    let img = t.apply(row.as_slice(), &mut plan);
                    out.row_mut(i).copy_from(&img.transpose());
                }
                Ok(out)
            }
            _ => Err(PcrError::InvalidParameter(format!(
                "{} is not a TensorSketch",
                self.kind
            ))),
        }
    }

    /// Explicit `R` of size `d^q × t` for TensorSketch.
    pub fn tensorsketch_matrix(&self) -> Result<DenseMatrix> {
        match &self.payload {
            Payload::Tensor(t) => Ok(t.materialize_transpose().transpose()),
            _ => Err(PcrError::InvalidParameter(format!(
                "{} is not a TensorSketch",
                self.kind
            ))),
        }
    }
}
