//! One-pass row-insertion estimator.
//!
//! Rows of `[A b]` arrive one at a time. The state keeps `SA`, `TA` and `Tb`,
//! whose sizes depend on the sketch sizes and `d` only. At the end,
//! `R = V_{SA,k}` and `x̃ = R (TAR)⁺ Tb`.

use std::time::Instant;

use crate::error::{dim_err, param_err, PcrError, Result};
use crate::linalg::{dominant_right_basis, lstsq_full_rank, DenseMatrix, DenseVector};
use crate::sketch::{countsketch_entry, derive_seed, subgaussian_column, HashPair, SketchKind, SketchOperator};
use crate::solvers::{Diagnostics, Method, PcrSolution};

#[derive(Debug, Clone)]
enum ColumnSource {
    Hashed {
        hash: HashPair,
        rows: usize,
    },
    Gaussian {
        seed: u64,
        rows: usize,
    },
    /// Columns of a fixed operator; the stream may not exceed its input size.
    Fixed(SketchOperator),
}

enum Column {
    Single(usize, f64),
    Dense(Vec<f64>),
}

impl ColumnSource {
    fn lazy(kind: SketchKind, rows: usize, seed: u64) -> Result<Self> {
        if rows == 0 {
            return param_err("sketch rows must be positive");
        }
        match kind {
            SketchKind::CountSketch => Ok(ColumnSource::Hashed {
                hash: HashPair::derive(seed, 0),
                rows,
            }),
            SketchKind::Subgaussian => Ok(ColumnSource::Gaussian { seed, rows }),
            SketchKind::TensorSketch => param_err("TensorSketch cannot sketch a row stream"),
        }
    }

    fn rows(&self) -> usize {
        match self {
            ColumnSource::Hashed { rows, .. } | ColumnSource::Gaussian { rows, .. } => *rows,
            ColumnSource::Fixed(op) => op.out_dim(),
        }
    }

    fn column(&self, i: u64) -> Result<Column> {
        match self {
            ColumnSource::Hashed { hash, rows } => {
                let (r, s) = countsketch_entry(hash, *rows, i);
                Ok(Column::Single(r, s))
            }
            ColumnSource::Gaussian { seed, rows } => Ok(Column::Dense(subgaussian_column(*seed, *rows, i))),
            ColumnSource::Fixed(op) => {
                if i as usize >= op.in_dim() {
                    return dim_err(format!(
                        "stream longer than the {} columns of a fixed sketch",
                        op.in_dim()
                    ));
                }
                if let Some((rows, signs)) = op.hash_tables() {
                    return Ok(Column::Single(rows[i as usize], signs[i as usize]));
                }
                Ok(Column::Dense(
                    op.materialize().column(i as usize).iter().copied().collect(),
                ))
            }
        }
    }
}

fn accumulate(column: &Column, target: &mut DenseMatrix, rhs: Option<(&mut DenseVector, f64)>, row: &[(usize, f64)]) {
    match column {
        Column::Single(r, s) => {
            for &(j, v) in row {
                target[(*r, j)] += s * v;
            }
            if let Some((tb, b)) = rhs {
                tb[*r] += s * b;
            }
        }
        Column::Dense(g) => {
            for &(j, v) in row {
                for (r, gr) in g.iter().enumerate() {
                    target[(r, j)] += gr * v;
                }
            }
            if let Some((tb, b)) = rhs {
                for (r, gr) in g.iter().enumerate() {
                    tb[r] += gr * b;
                }
            }
        }
    }
}

/// Sketch accumulators of a row stream.
#[derive(Debug, Clone)]
pub struct StreamState {
    d: usize,
    sa: DenseMatrix,
    ta: DenseMatrix,
    tb: DenseVector,
    rows_seen: u64,
    s_src: ColumnSource,
    t_src: ColumnSource,
    s_seed: u64,
    t_seed: u64,
}

/// CountSketch `S` and `T` seeded from `seed`.
pub fn stream_init(d: usize, s_rows: usize, t_rows: usize, seed: u64) -> Result<StreamState> {
    StreamState::new(
        d,
        SketchKind::CountSketch,
        s_rows,
        SketchKind::CountSketch,
        t_rows,
        seed,
    )
}

impl StreamState {
    pub fn new(
        d: usize,
        s_kind: SketchKind,
        s_rows: usize,
        t_kind: SketchKind,
        t_rows: usize,
        seed: u64,
    ) -> Result<Self> {
        if d == 0 {
            return param_err("row dimension must be positive");
        }
        let s_seed = derive_seed(seed, 0x5);
        let t_seed = derive_seed(seed, 0x7);
        Ok(Self::assemble(
            d,
            ColumnSource::lazy(s_kind, s_rows, s_seed)?,
            ColumnSource::lazy(t_kind, t_rows, t_seed)?,
            s_seed,
            t_seed,
        ))
    }

    /// Streams against fixed operators, e.g. identity embeddings; the stream
    /// length is bounded by their input dimension.
    pub fn with_operators(d: usize, s_op: SketchOperator, t_op: SketchOperator) -> Result<Self> {
        if d == 0 {
            return param_err("row dimension must be positive");
        }
        for op in [&s_op, &t_op] {
            if op.kind() == SketchKind::TensorSketch {
                return param_err("TensorSketch cannot sketch a row stream");
            }
        }
        let (s_seed, t_seed) = (s_op.seed().unwrap_or(0), t_op.seed().unwrap_or(0));
        Ok(Self::assemble(
            d,
            ColumnSource::Fixed(s_op),
            ColumnSource::Fixed(t_op),
            s_seed,
            t_seed,
        ))
    }

    fn assemble(d: usize, s_src: ColumnSource, t_src: ColumnSource, s_seed: u64, t_seed: u64) -> Self {
        Self {
            d,
            sa: DenseMatrix::zeros(s_src.rows(), d),
            ta: DenseMatrix::zeros(t_src.rows(), d),
            tb: DenseVector::zeros(t_src.rows()),
            rows_seen: 0,
            s_src,
            t_src,
            s_seed,
            t_seed,
        }
    }

    pub fn rows_seen(&self) -> u64 {
        self.rows_seen
    }

    pub fn sa(&self) -> &DenseMatrix {
        &self.sa
    }

    pub fn ta(&self) -> &DenseMatrix {
        &self.ta
    }

    pub fn tb(&self) -> &DenseVector {
        &self.tb
    }

    /// Bytes held by the accumulators.
    pub fn accumulator_bytes(&self) -> usize {
        (self.sa.len() + self.ta.len() + self.tb.len()) * std::mem::size_of::<f64>()
    }

    /// The realized `S` and `T` restricted to the first `n` rows.
    pub fn operators(&self, n: usize) -> Result<(SketchOperator, SketchOperator)> {
        let build = |src: &ColumnSource, seed: u64| -> Result<SketchOperator> {
            match src {
                ColumnSource::Hashed { rows, .. } => SketchOperator::countsketch(*rows, n, seed),
                ColumnSource::Gaussian { rows, .. } => SketchOperator::subgaussian(*rows, n, seed),
                ColumnSource::Fixed(op) => {
                    if n != op.in_dim() {
                        return dim_err("fixed operators are only available at their own size");
                    }
                    Ok(op.clone())
                }
            }
        };
        Ok((build(&self.s_src, self.s_seed)?, build(&self.t_src, self.t_seed)?))
    }

    pub fn update(&mut self, a_row: &[f64], b: f64) -> Result<()> {
        if a_row.len() != self.d {
            return dim_err(format!("row of length {} for dimension {}", a_row.len(), self.d));
        }
        let entries: Vec<(usize, f64)> = a_row.iter().copied().enumerate().collect();
        self.push(&entries, b)
    }

    /// Update with a row given by `(column, value)` pairs in increasing column
    /// order.
    pub fn update_sparse(&mut self, entries: &[(usize, f64)], b: f64) -> Result<()> {
        if entries.iter().any(|&(j, _)| j >= self.d) {
            return dim_err(format!("column index outside dimension {}", self.d));
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return param_err("sparse row indices must be strictly increasing");
        }
        self.push(entries, b)
    }

    fn push(&mut self, entries: &[(usize, f64)], b: f64) -> Result<()> {
        let row = self.rows_seen as usize;
        if let Some(&(j, _)) = entries.iter().find(|(_, v)| !v.is_finite()) {
            return Err(PcrError::NonFinite { row, col: j });
        }
        if !b.is_finite() {
            return Err(PcrError::NonFinite { row, col: self.d });
        }
        let i = self.rows_seen;
        let s_col = self.s_src.column(i)?;
        let t_col = self.t_src.column(i)?;
        accumulate(&s_col, &mut self.sa, None, entries);
        accumulate(&t_col, &mut self.ta, Some((&mut self.tb, b)), entries);
        self.rows_seen += 1;
        Ok(())
    }

    /// `x̃ = R (TAR)⁺ Tb` with `R = V_{SA,k}`. The reported objective is the
    /// sketched residual `‖TAx̃ − Tb‖`.
    pub fn finalize(self, k: usize) -> Result<PcrSolution> {
        let started = Instant::now();
        if self.rows_seen == 0 {
            return param_err("no rows were streamed");
        }
        let r = dominant_right_basis(&self.sa, k)?.v_k;
        let tar = &self.ta * &r;
        let gamma = lstsq_full_rank(&tar, &self.tb)?;
        let x = &r * &gamma;
        let objective = (&tar * &gamma - &self.tb).norm();
        Ok(PcrSolution {
            x,
            method: Method::Streaming,
            r_cols: k,
            diagnostics: Diagnostics {
                objective,
                constraint_norm: None,
                elapsed: started.elapsed(),
            },
        })
    }
}
