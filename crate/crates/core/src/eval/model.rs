use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{dim_err, param_err, PcrError, Result};
use crate::linalg::{check_finite, full_svd, pinv_solve, DenseMatrix, DenseVector};
use crate::sketch::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseKind {
    #[default]
    Gaussian,
    /// `±σ` with equal probability.
    Rademacher,
}

/// `b = f + ξ` with `ξ` i.i.d., zero mean, variance `σ²`.
#[derive(Debug, Clone)]
pub struct FixedDesignModel {
    a: DenseMatrix,
    f: DenseVector,
    sigma: f64,
    x_star: DenseVector,
    noise: NoiseKind,
}

impl FixedDesignModel {
    /// `x*` is the minimum-norm minimizer `A⁺f`.
    pub fn new(a: DenseMatrix, f: DenseVector, sigma: f64) -> Result<Self> {
        if f.len() != a.nrows() {
            return dim_err(format!("mean of length {} for {} rows", f.len(), a.nrows()));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return param_err(format!("noise level must be finite and nonnegative, got {sigma}"));
        }
        check_finite(&a)?;
        if let Some(i) = f.iter().position(|v| !v.is_finite()) {
            return Err(PcrError::NonFinite { row: i, col: 0 });
        }
        let x_star = pinv_solve(&a, &f)?;
        Ok(Self {
            a,
            f,
            sigma,
            x_star,
            noise: NoiseKind::Gaussian,
        })
    }

    /// Mean `f = Ax`.
    pub fn from_coefficients(a: DenseMatrix, x: &DenseVector, sigma: f64) -> Result<Self> {
        if x.len() != a.ncols() {
            return dim_err(format!("coefficients of length {} for {} columns", x.len(), a.ncols()));
        }
        let f = &a * x;
        Self::new(a, f, sigma)
    }

    pub fn with_noise(mut self, noise: NoiseKind) -> Self {
        self.noise = noise;
        self
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn f(&self) -> &DenseVector {
        &self.f
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn x_star(&self) -> &DenseVector {
        &self.x_star
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn sample_response(&self, seed: u64) -> DenseVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = self.sigma;
        match self.noise {
            NoiseKind::Gaussian => DenseVector::from_fn(self.n(), |i, _| {
                self.f[i] + sigma * rng.sample::<f64, _>(StandardNormal)
            }),
            NoiseKind::Rademacher => DenseVector::from_fn(self.n(), |i, _| {
                self.f[i] + if rng.random::<bool>() { sigma } else { -sigma }
            }),
        }
    }

    /// `‖Aθ − Ax*‖² / n`.
    pub fn prediction_loss(&self, theta: &DenseVector) -> Result<f64> {
        if theta.len() != self.a.ncols() {
            return dim_err(format!(
                "estimate of length {} for {} columns",
                theta.len(),
                self.a.ncols()
            ));
        }
        Ok((&self.a * (theta - &self.x_star)).norm_squared() / self.n() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Monte Carlo excess risk over `trials` fresh noise draws; trial `t` uses
/// its own seed derived from `(seed, t)`.
pub fn excess_risk_mc<F>(model: &FixedDesignModel, estimator: F, trials: usize, seed: u64) -> Result<RiskEstimate>
where
    F: Fn(&DenseMatrix, &DenseVector) -> Result<DenseVector>,
{
    if trials < 2 {
        return param_err("at least two trials are needed for a standard error");
    }
    let mut losses = Vec::with_capacity(trials);
    for t in 0..trials {
        let b = model.sample_response(derive_seed(seed, t as u64));
        let trial = |source: PcrError| PcrError::Trial {
            index: t,
            source: Box::new(source),
        };
        let theta = estimator(model.a(), &b).map_err(trial)?;
        losses.push(model.prediction_loss(&theta).map_err(trial)?);
    }
    let mean = losses.iter().sum::<f64>() / trials as f64;
    let var = losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    Ok(RiskEstimate {
        mean,
        std_error: (var / trials as f64).sqrt(),
        trials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasVariance {
    pub bias: f64,
    pub variance: f64,
}

impl BiasVariance {
    pub fn total(&self) -> f64 {
        self.bias + self.variance
    }
}

/// Closed-form excess risk of `x_M = M (AM)⁺ b`:
/// bias `‖(I − P_{AM})Ax*‖²/n`, variance `σ² rank(AM)/n`.
pub fn bias_variance(model: &FixedDesignModel, m: &DenseMatrix) -> Result<BiasVariance> {
    if m.nrows() != model.a.ncols() {
        return dim_err(format!("M has {} rows for {} columns of A", m.nrows(), model.a.ncols()));
    }
    let am = &model.a * m;
    let svd = full_svd(&am)?;
    let rank = svd.rank();
    let signal = &model.a * &model.x_star;
    let basis = svd.u.columns(0, rank);
    let resid = &signal - basis * basis.tr_mul(&signal);
    let n = model.n() as f64;
    Ok(BiasVariance {
        bias: resid.norm_squared() / n,
        variance: model.sigma * model.sigma * rank as f64 / n,
    })
}
