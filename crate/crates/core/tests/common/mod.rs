//! Reference implementations used as test oracles. None of these call into
//! the factorizations of the library under test.
#![allow(dead_code)]

use sketchpcr::linalg::{DenseMatrix, DenseVector};
use sketchpcr::sketch::SketchOperator;

/// Thin SVD by one-sided Jacobi rotations, values nonincreasing.
pub struct JacobiSvd {
    pub u: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
    pub v: Vec<Vec<f64>>,
}

impl JacobiSvd {
    pub fn u_matrix(&self, cols: usize) -> DenseMatrix {
        columns_to_matrix(&self.u[..cols])
    }

    pub fn v_matrix(&self, cols: usize) -> DenseMatrix {
        columns_to_matrix(&self.v[..cols])
    }
}

pub fn columns_to_matrix(cols: &[Vec<f64>]) -> DenseMatrix {
    let rows = cols.first().map_or(0, |c| c.len());
    DenseMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn jacobi_svd(m: &DenseMatrix) -> JacobiSvd {
    if m.nrows() < m.ncols() {
        let t = jacobi_svd(&m.transpose());
        return JacobiSvd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
    }
    let (n, d) = m.shape();
    let mut w: Vec<Vec<f64>> = (0..d).map(|j| (0..n).map(|i| m[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..d)
        .map(|j| (0..d).map(|i| f64::from(u8::from(i == j))).collect())
        .collect();
    for _ in 0..200 {
        let mut rotated = false;
        for p in 0..d {
            for q in p + 1..d {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols in [&mut w, &mut v] {
                    for i in 0..cols[p].len() {
                        let (x, y) = (cols[p][i], cols[q][i]);
                        cols[p][i] = c * x - s * y;
                        cols[q][i] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    let norms: Vec<f64> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u = order
        .iter()
        .map(|&j| {
            let s = norms[j];
            w[j].iter().map(|x| if s > 0.0 { x / s } else { 0.0 }).collect()
        })
        .collect();
    let v = order.iter().map(|&j| v[j].clone()).collect();
    JacobiSvd { u, sigma, v }
}

pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    jacobi_svd(m).sigma.first().copied().unwrap_or(0.0)
}

pub fn min_singular_value(m: &DenseMatrix) -> f64 {
    jacobi_svd(m).sigma.last().copied().unwrap_or(0.0)
}

/// Least squares through modified Gram-Schmidt with one reorthogonalization
/// pass and back substitution. Requires full column rank.
pub fn mgs_lstsq(m: &DenseMatrix, b: &DenseVector) -> DenseVector {
    let (n, k) = m.shape();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r = vec![vec![0.0; k]; k];
    for j in 0..k {
        let mut col: Vec<f64> = (0..n).map(|i| m[(i, j)]).collect();
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let c = dot(qi, &col);
                r[i][j] += c;
                for (x, y) in col.iter_mut().zip(qi) {
                    *x -= c * y;
                }
            }
        }
        let norm = dot(&col, &col).sqrt();
        assert!(norm > 0.0, "oracle needs full column rank");
        r[j][j] = norm;
        q.push(col.iter().map(|x| x / norm).collect());
    }
    let rhs: Vec<f64> = q.iter().map(|qi| dot(qi, b.as_slice())).collect();
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let tail: f64 = (i + 1..k).map(|j| r[i][j] * x[j]).sum();
        x[i] = (rhs[i] - tail) / r[i][i];
    }
    DenseVector::from_vec(x)
}

/// `‖P_U − P_W‖₂` from explicitly formed projectors.
pub fn projector_distance(u: &DenseMatrix, w: &DenseMatrix) -> f64 {
    let pu = u * u.transpose();
    let pw = w * w.transpose();
    spectral_norm(&(pu - pw))
}

/// PCR through the reduced problem `min_y ‖A V_k y − b‖`, with `V_k` from
/// the Jacobi oracle.
pub fn reduced_pcr_oracle(a: &DenseMatrix, b: &DenseVector, k: usize) -> DenseVector {
    let v_k = jacobi_svd(a).v_matrix(k);
    let y = mgs_lstsq(&(a * &v_k), b);
    v_k * y
}

/// `R V_{AR,k} (A R V_{AR,k})⁺ b` evaluated with the oracles.
pub fn sketched_pcr_oracle(a: &DenseMatrix, r: &DenseMatrix, b: &DenseVector, k: usize) -> DenseVector {
    let ar = a * r;
    let v = jacobi_svd(&ar).v_matrix(k);
    let y = mgs_lstsq(&(&ar * &v), b);
    r * (v * y)
}

/// TensorSketch image by enumerating every index tuple.
pub fn tensorsketch_brute_force(op: &SketchOperator, z: &[f64]) -> Vec<f64> {
    let q = op.degree();
    let d = z.len();
    let t = op.out_dim();
    let factors: Vec<(&[usize], &[f64])> = (0..q).map(|j| op.tensor_factor(j).expect("tensor sketch")).collect();
    let mut out = vec![0.0; t];
    let mut tuple = vec![0usize; q];
    loop {
        let mut bucket = 0;
        let mut value = 1.0;
        for (j, &i) in tuple.iter().enumerate() {
            bucket += factors[j].0[i];
            value *= factors[j].1[i] * z[i];
        }
        out[bucket % t] += value;
        let mut pos = q;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < d {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

/// Explicit degree-`q` feature rows `φ(a_i)` of `a`.
pub fn explicit_features(a: &DenseMatrix, q: usize) -> DenseMatrix {
    let d = a.ncols();
    let width = d.pow(q as u32);
    DenseMatrix::from_fn(a.nrows(), width, |i, col| {
        let mut rest = col;
        let mut value = 1.0;
        for _ in 0..q {
            value *= a[(i, rest % d)];
            rest /= d;
        }
        value
    })
}

/// Orthonormal `R` whose principal angles to `V_k` are `angles`, built from
/// the columns of an orthogonal `v`: `r_i = cos θ_i v_i + sin θ_i v_{k+i}`.
pub fn rotated_basis(v: &DenseMatrix, k: usize, angles: &[f64]) -> DenseMatrix {
    assert!(v.ncols() >= 2 * k && angles.len() == k);
    let mut r = DenseMatrix::zeros(v.nrows(), k);
    for (i, &theta) in angles.iter().enumerate() {
        let col = v.column(i) * theta.cos() + v.column(k + i) * theta.sin();
        r.set_column(i, &col);
    }
    r
}

/// Mean and standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
