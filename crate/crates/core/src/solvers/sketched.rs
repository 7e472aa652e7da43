use std::time::Instant;

use crate::error::{dim_err, param_err, Result};
use crate::linalg::{
    dominant_right_basis, ensure_gap, full_svd, lstsq_full_rank, pinv_solve, symmetric_eigen_desc, DataMatrix,
    DenseMatrix, DenseVector, OrthonormalBasis,
};
use crate::sketch::{SketchKind, SketchOperator};

use super::problem::{Method, PcrProblem, PcrSolution};

/// A compression matrix `R` (d×s), possibly held implicitly.
#[derive(Debug, Clone)]
pub enum RightFactor {
    Explicit(DenseMatrix),
    /// `Gᵀ` for a sketch `G`, applied without materializing it.
    SketchTranspose(SketchOperator),
    /// `L` with `LLᵀ = GᵀG`; spans `range(Gᵀ)` and yields the same estimators
    /// as `Gᵀ` when `G` has more rows than `A` has columns.
    Compressed(DenseMatrix),
    /// `outer · inner`.
    Product {
        outer: Box<RightFactor>,
        inner: DenseMatrix,
    },
}

impl RightFactor {
    pub fn nrows(&self) -> usize {
        match self {
            RightFactor::Explicit(m) | RightFactor::Compressed(m) => m.nrows(),
            RightFactor::SketchTranspose(g) => g.in_dim(),
            RightFactor::Product { outer, .. } => outer.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            RightFactor::Explicit(m) | RightFactor::Compressed(m) => m.ncols(),
            RightFactor::SketchTranspose(g) => g.out_dim(),
            RightFactor::Product { inner, .. } => inner.ncols(),
        }
    }

    /// `A·R`.
    pub fn a_times(&self, a: &DataMatrix) -> Result<DenseMatrix> {
        match self {
            RightFactor::Explicit(m) | RightFactor::Compressed(m) => a.mul_dense(m),
            RightFactor::SketchTranspose(g) => g.apply_right_transpose(a),
            RightFactor::Product { outer, inner } => Ok(outer.a_times(a)? * inner),
        }
    }

    /// `R·m`.
    pub fn times(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        if m.nrows() != self.ncols() {
            return dim_err(format!("factor with {} columns times {} rows", self.ncols(), m.nrows()));
        }
        match self {
            RightFactor::Explicit(r) | RightFactor::Compressed(r) => Ok(r * m),
            RightFactor::SketchTranspose(g) => g.apply_transpose(m),
            RightFactor::Product { outer, inner } => outer.times(&(inner * m)),
        }
    }

    pub fn times_vec(&self, v: &DenseVector) -> Result<DenseVector> {
        let m = DenseMatrix::from_column_slice(v.len(), 1, v.as_slice());
        Ok(self.times(&m)?.column(0).into_owned())
    }

    pub fn materialize(&self) -> Result<DenseMatrix> {
        self.times(&DenseMatrix::identity(self.ncols(), self.ncols()))
    }
}

pub(crate) fn reduced_pcr(ar: &DenseMatrix, b: &DenseVector, k: usize) -> Result<DenseVector> {
    if k > ar.nrows().min(ar.ncols()) {
        return dim_err(format!("AR is {}x{}, too small for rank {k}", ar.nrows(), ar.ncols()));
    }
    let svd = full_svd(ar)?;
    let sigma: Vec<f64> = svd.sigma.iter().copied().collect();
    ensure_gap(&sigma, k, ar.nrows(), ar.ncols())?;
    let coeff = svd.u.columns(0, k).tr_mul(b);
    let scaled = DenseVector::from_fn(k, |i, _| coeff[i] / svd.sigma[i]);
    Ok(svd.v.columns(0, k) * scaled)
}

/// `x_{R,k} = R V_{AR,k} (AR V_{AR,k})⁺ b`.
pub fn sketched_pcr(p: &PcrProblem, r: &DenseMatrix) -> Result<PcrSolution> {
    check_r(p, r)?;
    if r.ncols() < p.k() {
        return dim_err(format!("R has {} columns, fewer than k = {}", r.ncols(), p.k()));
    }
    sketched_pcr_with(p, &RightFactor::Explicit(r.clone()), Method::Sketched, r.ncols())
}

/// [`sketched_pcr`] for an implicit factor; `r_cols` is the reported width.
pub fn sketched_pcr_with(p: &PcrProblem, r: &RightFactor, method: Method, r_cols: usize) -> Result<PcrSolution> {
    let started = Instant::now();
    if r.nrows() != p.ncols() {
        return dim_err(format!("R has {} rows for {} columns of A", r.nrows(), p.ncols()));
    }
    let ar = r.a_times(p.a())?;
    let gamma = reduced_pcr(&ar, p.b(), p.k())?;
    let x = r.times_vec(&gamma)?;
    PcrSolution::assemble(p, x, method, r_cols, started)
}

/// Compressed least squares `x_R = R (AR)⁺ b`.
pub fn cls(p: &PcrProblem, r: &DenseMatrix) -> Result<PcrSolution> {
    check_r(p, r)?;
    cls_with(p, &RightFactor::Explicit(r.clone()), Method::Cls, r.ncols())
}

pub fn cls_with(p: &PcrProblem, r: &RightFactor, method: Method, r_cols: usize) -> Result<PcrSolution> {
    let started = Instant::now();
    if r.nrows() != p.ncols() {
        return dim_err(format!("R has {} rows for {} columns of A", r.nrows(), p.ncols()));
    }
    let ar = r.a_times(p.a())?;
    let gamma = pinv_solve(&ar, p.b())?;
    let x = r.times_vec(&gamma)?;
    PcrSolution::assemble(p, x, method, r_cols, started)
}

fn check_r(p: &PcrProblem, r: &DenseMatrix) -> Result<()> {
    if r.nrows() != p.ncols() || r.ncols() == 0 {
        return dim_err(format!(
            "R is {}x{} for {} columns of A",
            r.nrows(),
            r.ncols(),
            p.ncols()
        ));
    }
    crate::linalg::check_finite(r)
}

/// `R = V_{SA,k}`, the top-`k` right singular basis of the left sketch.
pub fn build_r_left(p: &PcrProblem, s_op: &SketchOperator) -> Result<OrthonormalBasis> {
    if s_op.in_dim() != p.nrows() {
        return dim_err(format!("sketch input {} for {} rows", s_op.in_dim(), p.nrows()));
    }
    let sa = s_op.apply_left_compact(p.a())?;
    let basis = dominant_right_basis(&sa, p.k())?;
    OrthonormalBasis::new(basis.v_k)
}

/// Left sketching: `x_R = R (AR)⁺ b` with `R = V_{SA,k}`, solved through a QR
/// factorization of the `n×k` matrix `AR`.
pub fn left_sketched_pcr(p: &PcrProblem, s_op: &SketchOperator) -> Result<PcrSolution> {
    let started = Instant::now();
    let r = build_r_left(p, s_op)?;
    let ar = p.a().mul_dense(r.matrix())?;
    let gamma = lstsq_full_rank(&ar, p.b())?;
    let x = r.matrix() * gamma;
    PcrSolution::assemble(p, x, Method::Left, s_op.out_dim(), started)
}

/// `R = Gᵀ`. CountSketch factors drop their empty rows; a subgaussian `G` with
/// more rows than `d` is replaced by `L = W Λ^{1/2}` from `GᵀG = W Λ Wᵀ`.
pub fn build_r_right(g_op: &SketchOperator) -> Result<RightFactor> {
    match g_op.kind() {
        SketchKind::CountSketch => Ok(RightFactor::SketchTranspose(g_op.compact())),
        SketchKind::Subgaussian if g_op.out_dim() <= g_op.in_dim() => Ok(RightFactor::SketchTranspose(g_op.clone())),
        SketchKind::Subgaussian => {
            let eig = symmetric_eigen_desc(&g_op.transpose_gram()?)?;
            let d = g_op.in_dim();
            let tol = eig.values[0].max(0.0) * d as f64 * f64::EPSILON;
            let keep = eig.values.iter().filter(|&&l| l > tol).count();
            let mut l = eig.vectors.columns(0, keep).into_owned();
            for j in 0..keep {
                l.column_mut(j).scale_mut(eig.values[j].sqrt());
            }
            Ok(RightFactor::Compressed(l))
        }
        SketchKind::TensorSketch => param_err("TensorSketch cannot act as a right sketch of A"),
    }
}

/// `R = Gᵀ V_{SAGᵀ,k}`.
pub fn build_r_twosided(p: &PcrProblem, s_op: &SketchOperator, g_op: &SketchOperator) -> Result<RightFactor> {
    if g_op.in_dim() != p.ncols() {
        return dim_err("sketch inputs do not match the data matrix");
    }
    build_r_twosided_from(p, s_op, build_r_right(g_op)?)
}

/// [`build_r_twosided`] with `Gᵀ` already built by [`build_r_right`].
pub fn build_r_twosided_from(p: &PcrProblem, s_op: &SketchOperator, outer: RightFactor) -> Result<RightFactor> {
    if s_op.in_dim() != p.nrows() || outer.nrows() != p.ncols() {
        return dim_err("sketch inputs do not match the data matrix");
    }
    let c = outer.a_times(p.a())?;
    let d = s_op.apply_left_compact(&DataMatrix::Dense(c))?;
    let basis = dominant_right_basis(&d, p.k())?;
    Ok(RightFactor::Product {
        outer: Box::new(outer),
        inner: basis.v_k,
    })
}

/// Right sketching: `x_{R,k}` with `R = Gᵀ`.
pub fn right_sketched_pcr(p: &PcrProblem, g_op: &SketchOperator) -> Result<PcrSolution> {
    if g_op.in_dim() != p.ncols() {
        return dim_err(format!("sketch input {} for {} columns", g_op.in_dim(), p.ncols()));
    }
    let r = build_r_right(g_op)?;
    sketched_pcr_with(p, &r, Method::Right, g_op.out_dim())
}

/// Compressed least squares with `R = Gᵀ`.
pub fn right_sketched_cls(p: &PcrProblem, g_op: &SketchOperator) -> Result<PcrSolution> {
    if g_op.in_dim() != p.ncols() {
        return dim_err(format!("sketch input {} for {} columns", g_op.in_dim(), p.ncols()));
    }
    let r = build_r_right(g_op)?;
    cls_with(p, &r, Method::Cls, g_op.out_dim())
}

/// Two-sided sketching: `x_{R,k}` with `R = Gᵀ V_{SAGᵀ,k}`.
pub fn two_sided_sketched_pcr(p: &PcrProblem, s_op: &SketchOperator, g_op: &SketchOperator) -> Result<PcrSolution> {
    let r = build_r_twosided(p, s_op, g_op)?;
    sketched_pcr_with(p, &r, Method::TwoSided, g_op.out_dim())
}

/// [`two_sided_sketched_pcr`] reusing a right factor from [`build_r_right`];
/// `t` is the row count of `G`.
pub fn two_sided_sketched_pcr_from(
    p: &PcrProblem,
    s_op: &SketchOperator,
    outer: RightFactor,
    t: usize,
) -> Result<PcrSolution> {
    let r = build_r_twosided_from(p, s_op, outer)?;
    sketched_pcr_with(p, &r, Method::TwoSided, t)
}

#[cfg(test)]
mod tests {
    use super::super::exact::{exact_pcr, ols, ExactReference};
    use super::*;
    use crate::linalg::subspace_distance;

    fn instance(n: usize, d: usize, k: usize) -> PcrProblem {
        let a = DenseMatrix::from_fn(n, d, |i, j| {
            let noise = (((i * 131 + j * 71) % 97) as f64 / 97.0 - 0.5) * 0.3;
            noise + if i % d == j { 3.0 / (1.0 + j as f64) } else { 0.0 }
        });
        let b = DenseVector::from_fn(n, |i, _| ((i * 13) % 11) as f64 / 11.0 - 0.4);
        PcrProblem::new(a, b, k).unwrap()
    }

    #[test]
    fn identity_r_gives_exact() {
        let p = instance(20, 6, 3);
        let x = sketched_pcr(&p, &DenseMatrix::identity(6, 6)).unwrap().x;
        assert!((x - exact_pcr(&p).unwrap().x).norm() < 1e-10);
        let x = cls(&p, &DenseMatrix::identity(6, 6)).unwrap().x;
        assert!((x - ols(&p).unwrap().x).norm() < 1e-10);
    }

    #[test]
    fn r_equal_to_v_k_gives_exact() {
        let p = instance(25, 7, 3);
        let reference = ExactReference::new(&p).unwrap();
        let v_k = reference.truncated().v_k;
        let x = sketched_pcr(&p, &v_k).unwrap().x;
        assert!((&x - reference.x_k()).norm() < 1e-10 * reference.x_k().norm());
        let y = cls(&p, &v_k).unwrap().x;
        assert!((x - y).norm() < 1e-12);
    }

    #[test]
    fn cls_normal_equations() {
        let p = instance(30, 8, 2);
        let r = DenseMatrix::from_fn(8, 4, |i, j| ((i + 3 * j) % 5) as f64 - 2.0);
        let x = cls(&p, &r).unwrap().x;
        let a = p.a().to_dense();
        let ar = &*a * &r;
        let resid = &*a * x - p.b();
        assert!(ar.tr_mul(&resid).norm() < 1e-8);
    }

    #[test]
    fn implicit_and_explicit_right_factors_agree() {
        let p = instance(30, 10, 3);
        for g in [
            SketchOperator::countsketch(8, 10, 4).unwrap(),
            SketchOperator::subgaussian(6, 10, 4).unwrap(),
            SketchOperator::subgaussian(25, 10, 4).unwrap(),
        ] {
            let implicit = right_sketched_pcr(&p, &g).unwrap().x;
            let explicit = sketched_pcr(&p, &g.materialize().transpose()).unwrap().x;
            assert!((&implicit - &explicit).norm() < 1e-9 * explicit.norm().max(1.0));
            let c1 = right_sketched_cls(&p, &g).unwrap().x;
            let c2 = cls(&p, &g.materialize().transpose()).unwrap().x;
            assert!((c1 - c2).norm() < 1e-9 * explicit.norm().max(1.0));
        }
    }

    #[test]
    fn identity_left_sketch_recovers_v_k() {
        let p = instance(40, 6, 2);
        let r = build_r_left(&p, &SketchOperator::identity(40).unwrap()).unwrap();
        let v_k = OrthonormalBasis::new(ExactReference::new(&p).unwrap().truncated().v_k).unwrap();
        assert!(subspace_distance(&r, &v_k).unwrap() < 1e-10);
        let x = left_sketched_pcr(&p, &SketchOperator::identity(40).unwrap()).unwrap().x;
        assert!((x - exact_pcr(&p).unwrap().x).norm() < 1e-9);
    }

    #[test]
    fn identity_two_sided_recovers_v_k() {
        let p = instance(30, 6, 2);
        let r = build_r_twosided(
            &p,
            &SketchOperator::identity(30).unwrap(),
            &SketchOperator::identity(6).unwrap(),
        )
        .unwrap();
        let r = OrthonormalBasis::orthonormalize(&r.materialize().unwrap()).unwrap();
        let v_k = OrthonormalBasis::new(ExactReference::new(&p).unwrap().truncated().v_k).unwrap();
        assert!(subspace_distance(&r, &v_k).unwrap() < 1e-10);
    }

    #[test]
    fn prebuilt_right_factor_gives_the_same_solution() {
        let p = instance(40, 8, 2);
        let s = SketchOperator::countsketch(20, 40, 1).unwrap();
        let g = SketchOperator::subgaussian(30, 8, 2).unwrap();
        let direct = two_sided_sketched_pcr(&p, &s, &g).unwrap();
        let reused = two_sided_sketched_pcr_from(&p, &s, build_r_right(&g).unwrap(), 30).unwrap();
        assert_eq!(direct.x, reused.x);
        assert_eq!(reused.r_cols, 30);
    }

    #[test]
    fn shape_errors() {
        let p = instance(10, 4, 2);
        assert!(sketched_pcr(&p, &DenseMatrix::identity(5, 5)).is_err());
        assert!(sketched_pcr(&p, &DenseMatrix::identity(4, 1)).is_err());
        assert!(right_sketched_pcr(&p, &SketchOperator::countsketch(3, 5, 0).unwrap()).is_err());
    }
}
