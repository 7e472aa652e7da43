use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::linalg::{DenseMatrix, DenseVector};

use super::hashing::HashPair;

/// Sketch widths at or above this use the FFT convolution path.
pub const FFT_THRESHOLD: usize = 64;

/// Per-factor bucket and sign tables of a TensorSketch.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TensorTables {
    out_dim: usize,
    rows: Vec<Vec<usize>>,
    signs: Vec<Vec<f64>>,
}

impl TensorTables {
    pub(crate) fn derive(q: usize, d: usize, t: usize, seed: u64) -> Self {
        let mut rows = Vec::with_capacity(q);
        let mut signs = Vec::with_capacity(q);
        for j in 0..q {
            let h = HashPair::derive(seed, j as u64);
            rows.push((0..d as u64).map(|i| h.bucket(i, t)).collect());
            signs.push((0..d as u64).map(|i| h.sign(i)).collect());
        }
        Self {
            out_dim: t,
            rows,
            signs,
        }
    }

    pub(crate) fn degree(&self) -> usize {
        self.rows.len()
    }

    pub(crate) fn factor(&self, j: usize) -> Option<(&[usize], &[f64])> {
        Some((self.rows.get(j)?.as_slice(), self.signs.get(j)?.as_slice()))
    }

    fn image(&self, j: usize, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.out_dim];
        for (i, &v) in z.iter().enumerate() {
            if v != 0.0 {
                out[self.rows[j][i]] += self.signs[j][i] * v;
            }
        }
        out
    }

    /// Cyclic convolution of the per-factor CountSketch images of `z`.
    pub(crate) fn apply(&self, z: &[f64], plan: &mut ConvolutionPlan) -> DenseVector {
        let images: Vec<Vec<f64>> = (0..self.degree()).map(|j| self.image(j, z)).collect();
        DenseVector::from_vec(plan.convolve(&images))
    }

    /// `Rᵀ` as a `t × d^q` matrix, tuples in lexicographic order.
    pub(crate) fn materialize_transpose(&self) -> DenseMatrix {
        let q = self.degree();
        let d = self.rows[0].len();
        let total = d.pow(q as u32);
        let mut m = DenseMatrix::zeros(self.out_dim, total);
        for col in 0..total {
            let mut rest = col;
            let mut bucket = 0usize;
            let mut sign = 1.0;
            for j in (0..q).rev() {
                let i = rest % d;
                rest /= d;
                bucket += self.rows[j][i];
                sign *= self.signs[j][i];
            }
            m[(bucket % self.out_dim, col)] = sign;
        }
        m
    }
}

type FftPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>, usize);

/// Cyclic convolution of `q` length-`t` sequences: direct for narrow sketches,
/// otherwise a zero-padded power-of-two FFT of the linear convolution folded
/// back modulo `t`.
pub(crate) struct ConvolutionPlan {
    t: usize,
    /// Forward and inverse transforms and their length.
    fft: Option<FftPair>,
}

impl ConvolutionPlan {
    pub(crate) fn new(q: usize, t: usize) -> Self {
        let fft = (q > 1 && t >= FFT_THRESHOLD).then(|| {
            let len = (q * (t - 1) + 1).next_power_of_two();
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(len), planner.plan_fft_inverse(len), len)
        });
        Self { t, fft }
    }

    pub(crate) fn convolve(&mut self, images: &[Vec<f64>]) -> Vec<f64> {
        if images.len() == 1 {
            return images[0].clone();
        }
        match &self.fft {
            None => direct(images, self.t),
            Some((fwd, inv, len)) => {
                let len = *len;
                let mut acc = vec![Complex64::new(1.0, 0.0); len];
                for img in images {
                    let mut buf: Vec<Complex64> = img.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                    buf.resize(len, Complex64::new(0.0, 0.0));
                    fwd.process(&mut buf);
                    for (a, b) in acc.iter_mut().zip(&buf) {
                        *a *= b;
                    }
                }
                inv.process(&mut acc);
                let scale = 1.0 / len as f64;
                let mut out = vec![0.0; self.t];
                for (i, c) in acc.iter().enumerate() {
                    out[i % self.t] += c.re * scale;
                }
                out
            }
        }
    }
}

fn direct(images: &[Vec<f64>], t: usize) -> Vec<f64> {
    let mut acc = images[0].clone();
    for img in &images[1..] {
        let mut next = vec![0.0; t];
        for (a, &x) in acc.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (b, &y) in img.iter().enumerate() {
                next[(a + b) % t] += x * y;
            }
        }
        acc = next;
    }
    acc
}

/// The explicit degree-`q` tensor power of `z`, lexicographic tuple order.
pub fn explicit_feature_map(z: &[f64], q: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..q {
        out = out.iter().flat_map(|&a| z.iter().map(move |&b| a * b)).collect();
    }
    out
}
