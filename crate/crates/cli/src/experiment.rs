//! Experiment configuration and the solver sweep.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use sketchpcr::eval::{gaussian_matrix, planted_matrix};
use sketchpcr::linalg::{DataMatrix, DenseVector};
use sketchpcr::sketch::{derive_seed, SketchOperator};
use sketchpcr::solvers::{
    certify_with, exact_pcr, input_sparsity_pcp, left_sketched_pcr, ols, right_sketched_cls, right_sketched_pcr,
    two_sided_sketched_pcr, CertificateMode, ExactReference, PcrProblem,
};

use crate::io::{load_data, LoadError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Exact,
    Ols,
    Left,
    Right,
    #[value(name = "twosided")]
    #[serde(rename = "twosided")]
    TwoSided,
    Cls,
    InputSparsity,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Ols => "ols",
            SolverKind::Left => "left",
            SolverKind::Right => "right",
            SolverKind::TwoSided => "twosided",
            SolverKind::Cls => "cls",
            SolverKind::InputSparsity => "input-sparsity",
        }
    }

    /// Input-sparsity output is judged as a projection, the rest as regressions.
    fn certificate_mode(self) -> CertificateMode {
        match self {
            SolverKind::InputSparsity => CertificateMode::Pcp,
            _ => CertificateMode::Pcr,
        }
    }

    fn uses_s(self) -> bool {
        matches!(
            self,
            SolverKind::Left | SolverKind::TwoSided | SolverKind::InputSparsity
        )
    }

    fn uses_t(self) -> bool {
        matches!(
            self,
            SolverKind::Right | SolverKind::Cls | SolverKind::TwoSided | SolverKind::InputSparsity
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SketchChoice {
    Countsketch,
    Subgaussian,
}

impl SketchChoice {
    pub fn build(self, out_dim: usize, in_dim: usize, seed: u64) -> sketchpcr::Result<SketchOperator> {
        match self {
            SketchChoice::Countsketch => SketchOperator::countsketch(out_dim, in_dim, seed),
            SketchChoice::Subgaussian => SketchOperator::subgaussian(out_dim, in_dim, seed),
        }
    }
}

/// Planted instance `b = Aw + ξ` with `‖ξ‖ ≈ noise·‖Aw‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub gap: f64,
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Parses `n,d,k,gap`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!("expected n,d,k,gap, got {text:?}"));
        }
        let count = |s: &str, name: &str| {
            s.parse::<usize>()
                .map_err(|_| format!("{name} must be a count, got {s:?}"))
        };
        let gap: f64 = parts[3]
            .parse()
            .map_err(|_| format!("gap must be a number, got {:?}", parts[3]))?;
        Ok(Self {
            n: count(parts[0], "n")?,
            d: count(parts[1], "d")?,
            k: count(parts[2], "k")?,
            gap,
            noise: 0.5,
            seed: 0,
        })
    }

    pub fn generate(&self) -> sketchpcr::Result<(DataMatrix, DenseVector)> {
        let a = planted_matrix(self.n, self.d, self.k, self.gap, self.seed)?;
        let w = gaussian_matrix(self.d, 1, derive_seed(self.seed, 1))
            .column(0)
            .into_owned();
        let f = &a * w;
        let xi = gaussian_matrix(self.n, 1, derive_seed(self.seed, 2))
            .column(0)
            .into_owned();
        let scale = self.noise * f.norm() / (self.n as f64).sqrt();
        let b = &f + xi * scale;
        Ok((DataMatrix::Dense(a), b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    File(PathBuf),
    Synthetic(SyntheticSpec),
}

impl DataSource {
    pub fn load(&self, center: bool) -> Result<(DataMatrix, DenseVector), ConfigError> {
        let (a, mut b) = match self {
            DataSource::File(path) => return Ok(load_data(path, center)?),
            DataSource::Synthetic(spec) => spec.generate().map_err(|e| ConfigError::Invalid(e.to_string()))?,
        };
        if center {
            let mean = b.mean();
            b.add_scalar_mut(-mean);
        }
        Ok((a, b))
    }
}

/// Sketch sizes per `k`: explicit values, or multiples of `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SizeAxis {
    Fixed(Vec<usize>),
    Ratio(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub solvers: Vec<SolverKind>,
    pub sketch: SketchChoice,
    pub ks: Vec<usize>,
    /// Left sketch sizes `s`; also used for `t` when `t` is empty.
    pub sizes: SizeAxis,
    /// Right sketch sizes, paired with `sizes` by position; a single value
    /// applies to every entry.
    pub t: Vec<usize>,
    pub seeds: usize,
    pub seed0: u64,
    /// Accuracy of the input-sparsity solver.
    pub eps: f64,
    pub center_response: bool,
    /// Upper limit on `n·d·min(n,d)` for computing the exact reference.
    pub reference_budget: f64,
}

impl ExperimentConfig {
    pub fn new(data: DataSource, solvers: Vec<SolverKind>, ks: Vec<usize>) -> Self {
        Self {
            data,
            solvers,
            sketch: SketchChoice::Countsketch,
            ks,
            sizes: SizeAxis::Ratio(vec![4.0]),
            t: Vec::new(),
            seeds: 1,
            seed0: 0,
            eps: 1e-3,
            center_response: false,
            reference_budget: 4e9,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.solvers.is_empty() {
            return bad("no solver selected");
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return bad("k values must be positive");
        }
        if self.seeds == 0 {
            return bad("at least one seed is required");
        }
        match &self.sizes {
            SizeAxis::Fixed(s) if s.is_empty() || s.contains(&0) => return bad("sketch sizes must be positive"),
            SizeAxis::Ratio(r) if r.is_empty() || r.iter().any(|v| !(*v > 0.0 && v.is_finite())) => {
                return bad("ratios must be positive")
            }
            _ => {}
        }
        if self.t.contains(&0) {
            return bad("sketch sizes must be positive");
        }
        let n_sizes = match &self.sizes {
            SizeAxis::Fixed(s) => s.len(),
            SizeAxis::Ratio(r) => r.len(),
        };
        if self.t.len() > 1 && self.t.len() != n_sizes {
            return bad("--t must list one value or one per sketch size");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps must lie in (0, 1)");
        }
        if let DataSource::File(path) = &self.data {
            if !path.exists() {
                return Err(ConfigError::Invalid(format!("{} does not exist", path.display())));
            }
        }
        Ok(())
    }

    /// `(s, t)` pairs for rank `k`.
    pub fn size_points(&self, k: usize) -> Vec<(usize, usize)> {
        let s: Vec<usize> = match &self.sizes {
            SizeAxis::Fixed(s) => s.clone(),
            SizeAxis::Ratio(r) => r
                .iter()
                .map(|ratio| ((ratio * k as f64).ceil() as usize).max(1))
                .collect(),
        };
        s.iter()
            .enumerate()
            .map(|(i, &s)| {
                let t = match self.t.len() {
                    0 => s,
                    1 => self.t[0],
                    _ => self.t[i],
                };
                (s, t)
            })
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// One `(solver, k, s, t, seed)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub k: usize,
    pub s: Option<usize>,
    pub t: Option<usize>,
    pub seed: u64,
    /// `‖Ax − b‖ / ‖b‖`.
    pub objective_rel: Option<f64>,
    /// `‖Ax − b‖ / ‖Ax_k − b‖`.
    pub objective_ratio: Option<f64>,
    /// `‖V_{A,k+}ᵀx‖ / ‖b‖`; for input-sparsity runs `‖U_{A,k+}ᵀAx‖ / ‖b‖`.
    pub constraint_rel: Option<f64>,
    /// `|‖Ax − b‖ − ‖Ax_k − b‖| / ‖b‖`.
    pub eps_observed: Option<f64>,
    pub wall_ms: f64,
    pub error: Option<String>,
}

impl RunRecord {
    fn key(&self) -> (&str, usize, Option<usize>, Option<usize>, u64) {
        (&self.method, self.k, self.s, self.t, self.seed)
    }

    /// The record with its timing zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_ms: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let m = v.len();
        let median = if m % 2 == 1 {
            v[m / 2]
        } else {
            0.5 * (v[m / 2 - 1] + v[m / 2])
        };
        Some(Self {
            median,
            min: v[0],
            max: v[m - 1],
        })
    }
}

/// Per `(method, k, s, t)` statistics over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: String,
    pub k: usize,
    pub s: Option<usize>,
    pub t: Option<usize>,
    pub runs: usize,
    pub failures: usize,
    pub objective_rel: Option<Summary>,
    pub objective_ratio: Option<Summary>,
    pub constraint_rel: Option<Summary>,
}

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: Option<ExperimentConfig>,
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl RunReport {
    pub fn empty() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config: None,
            records: Vec::new(),
            aggregates: Vec::new(),
        }
    }

    pub fn from_records(config: Option<ExperimentConfig>, mut records: Vec<RunRecord>) -> Self {
        records.sort_by(|a, b| a.key().cmp(&b.key()));
        let aggregates = aggregate(&records);
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            records,
            aggregates,
        }
    }

    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }
}

type GroupKey<'a> = (&'a str, usize, Option<usize>, Option<usize>);

fn aggregate(records: &[RunRecord]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<GroupKey, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.method, r.k, r.s, r.t)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((method, k, s, t), rs)| {
            let collect =
                |f: fn(&RunRecord) -> Option<f64>| Summary::of(&rs.iter().filter_map(|r| f(r)).collect::<Vec<_>>());
            Aggregate {
                method: method.to_string(),
                k,
                s,
                t,
                runs: rs.len(),
                failures: rs.iter().filter(|r| r.error.is_some()).count(),
                objective_rel: collect(|r| r.objective_rel),
                objective_ratio: collect(|r| r.objective_ratio),
                constraint_rel: collect(|r| r.constraint_rel),
            }
        })
        .collect()
}

/// Runs one solver; returns the coefficient vector.
pub fn solve_once(
    p: &PcrProblem,
    solver: SolverKind,
    sketch: SketchChoice,
    s: usize,
    t: usize,
    seed: u64,
    eps: f64,
) -> sketchpcr::Result<DenseVector> {
    let (n, d) = (p.nrows(), p.ncols());
    let s_op = || sketch.build(s, n, derive_seed(seed, 1));
    let g_op = || sketch.build(t, d, derive_seed(seed, 2));
    Ok(match solver {
        SolverKind::Exact => exact_pcr(p)?.x,
        SolverKind::Ols => ols(p)?.x,
        SolverKind::Left => left_sketched_pcr(p, &s_op()?)?.x,
        SolverKind::Right => right_sketched_pcr(p, &g_op()?)?.x,
        SolverKind::Cls => right_sketched_cls(p, &g_op()?)?.x,
        SolverKind::TwoSided => two_sided_sketched_pcr(p, &s_op()?, &g_op()?)?.x,
        SolverKind::InputSparsity => input_sparsity_pcp(p, s, t, eps, seed)?.y,
    })
}

struct Cell {
    solver: SolverKind,
    k_index: usize,
    s: usize,
    t: usize,
    seed: u64,
}

fn reference_affordable(n: usize, d: usize, budget: f64) -> bool {
    n as f64 * d as f64 * n.min(d) as f64 <= budget
}

/// Executes every `(solver, k, size, seed)` cell. Cell failures are recorded
/// in the report; only configuration and loading problems are errors.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<RunReport, ConfigError> {
    cfg.validate()?;
    let (a, b) = cfg.data.load(cfg.center_response)?;
    let (n, d) = (a.nrows(), a.ncols());
    for &k in &cfg.ks {
        if k > n.min(d) {
            return Err(ConfigError::Invalid(format!(
                "k = {k} exceeds min(n, d) = {}",
                n.min(d)
            )));
        }
    }
    let problems: Vec<PcrProblem> = cfg
        .ks
        .iter()
        .map(|&k| PcrProblem::new(a.clone(), b.clone(), k).map_err(|e| ConfigError::Invalid(e.to_string())))
        .collect::<Result<_, _>>()?;
    let with_reference = reference_affordable(n, d, cfg.reference_budget);
    if !with_reference {
        log::warn!("exact reference skipped: {n}x{d} exceeds the budget");
    }
    let references: Vec<Option<Result<ExactReference, String>>> = problems
        .par_iter()
        .map(|p| with_reference.then(|| ExactReference::new(p).map_err(|e| e.to_string())))
        .collect();

    let mut cells = Vec::new();
    for &solver in &cfg.solvers {
        for (k_index, &k) in cfg.ks.iter().enumerate() {
            let points = if solver.uses_s() || solver.uses_t() {
                cfg.size_points(k)
            } else {
                vec![(0, 0)]
            };
            for (s, t) in points {
                for seed in cfg.seed0..cfg.seed0 + cfg.seeds as u64 {
                    cells.push(Cell {
                        solver,
                        k_index,
                        s,
                        t,
                        seed,
                    });
                }
            }
        }
    }

    let records: Vec<RunRecord> = cells
        .par_iter()
        .map(|c| {
            let p = &problems[c.k_index];
            let started = Instant::now();
            let outcome = solve_once(p, c.solver, cfg.sketch, c.s, c.t, c.seed, cfg.eps);
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;
            let mut record = RunRecord {
                method: c.solver.name().to_string(),
                k: p.k(),
                s: c.solver.uses_s().then_some(c.s),
                t: c.solver.uses_t().then_some(c.t),
                seed: c.seed,
                objective_rel: None,
                objective_ratio: None,
                constraint_rel: None,
                eps_observed: None,
                wall_ms,
                error: None,
            };
            let x = match outcome {
                Ok(x) => x,
                Err(e) => {
                    record.error = Some(e.to_string());
                    return record;
                }
            };
            let b_norm = p.b().norm();
            let scale = if b_norm > 0.0 { b_norm } else { 1.0 };
            match p.objective(&x) {
                Ok(obj) => record.objective_rel = Some(obj / scale),
                Err(e) => record.error = Some(e.to_string()),
            }
            match &references[c.k_index] {
                Some(Ok(reference)) => {
                    if let (Some(obj), Ok(cert)) = (
                        record.objective_rel,
                        certify_with(reference, p, &x, c.solver.certificate_mode()),
                    ) {
                        let base = reference.objective();
                        record.objective_ratio = (base > 0.0).then(|| obj * scale / base);
                        record.constraint_rel = Some(cert.upsilon_observed);
                        record.eps_observed = Some(cert.eps_observed);
                    }
                }
                Some(Err(e)) => log::debug!("no reference for k = {}: {e}", p.k()),
                None => {}
            }
            record
        })
        .collect();
    Ok(RunReport::from_records(Some(cfg.clone()), records))
}
