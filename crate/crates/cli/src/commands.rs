//! Command-line interface of the `pcr` binary.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sketchpcr::eval::{risk_bound_check, BoundKind, FixedDesignModel};
use sketchpcr::kernel::{exact_kernel_pcr, sketched_kernel_pcr, KernelSpec};
use sketchpcr::linalg::{stable_rank, DenseMatrix, DenseVector};
use sketchpcr::sketch::{derive_seed, gram_error, sketch_rows_for_gram_with, SketchKind, SketchOperator};
use sketchpcr::streaming::StreamState;

use crate::experiment::{
    run_sweep, ConfigError, DataSource, ExperimentConfig, RunReport, SizeAxis, SketchChoice, SolverKind, SyntheticSpec,
};
use crate::io::{load_data, CsvRows, Format, SvmlightRows};
use crate::report::{write_report, OutputFormat};

/// Exit status when some sweep cells failed.
pub const EXIT_PARTIAL: i32 = 2;
/// Exit status for configuration, parsing and loading errors.
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "pcr", version, about = "Sketched principal component regression experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solver at one rank and sketch size.
    Solve(SolveArgs),
    /// Run a grid of solvers, ranks, sketch sizes and seeds.
    Sweep(SweepArgs),
    /// One pass over a data file with the streaming estimator.
    Stream(StreamArgs),
    /// Polynomial-kernel PCR, exact or TensorSketch-based.
    Kernel(KernelArgs),
    /// Empirical checks of sketch sizing and risk bounds on a data set.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV (last column is the response) or svmlight file.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub data: Option<PathBuf>,
    /// Planted instance `n,d,k,gap`.
    #[arg(long, value_parser = SyntheticSpec::parse)]
    pub synthetic: Option<SyntheticSpec>,
    /// Noise level of synthetic responses relative to the signal.
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    /// Seed of the synthetic instance.
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    /// Subtract the response mean.
    #[arg(long)]
    pub center_response: bool,
}

impl DataArgs {
    fn source(&self) -> DataSource {
        match (&self.data, &self.synthetic) {
            (Some(path), _) => DataSource::File(path.clone()),
            (None, Some(spec)) => DataSource::Synthetic(SyntheticSpec {
                noise: self.noise,
                seed: self.data_seed,
                ..*spec
            }),
            (None, None) => unreachable!("clap requires one data source"),
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub solver: SolverKind,
    #[arg(long)]
    pub k: usize,
    /// Left sketch size; defaults to 4k.
    #[arg(long)]
    pub s: Option<usize>,
    /// Right sketch size; defaults to s.
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long, value_enum, default_value = "countsketch")]
    pub sketch: SketchChoice,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Target accuracy of the input-sparsity solver.
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub solver: Vec<SolverKind>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<usize>,
    /// Left sketch sizes.
    #[arg(long, value_delimiter = ',', conflicts_with = "ratio")]
    pub s: Vec<usize>,
    /// Right sketch sizes: one value, or one per left size.
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<usize>,
    /// Sketch sizes as multiples of k.
    #[arg(long, value_delimiter = ',')]
    pub ratio: Vec<f64>,
    #[arg(long, value_enum, default_value = "countsketch")]
    pub sketch: SketchChoice,
    /// Number of seeds per cell.
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed0: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Largest n·d·min(n,d) for which the exact reference is computed.
    #[arg(long, default_value_t = 4e9)]
    pub reference_budget: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    /// CSV or svmlight file, read once row by row.
    #[arg(long)]
    pub data: PathBuf,
    /// Number of features; required for svmlight input.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long, value_enum, default_value = "countsketch")]
    pub sketch: SketchChoice,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelMode {
    Exact,
    Sketched,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    #[arg(long, default_value_t = 0.0)]
    pub offset: f64,
    /// Number of principal components.
    #[arg(long)]
    pub rank: usize,
    /// TensorSketch width.
    #[arg(long, default_value_t = 256)]
    pub sketch_cols: usize,
    #[arg(long, value_enum, default_value = "sketched")]
    pub mode: KernelMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Held-out CSV file scored with the fitted model.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "countsketch")]
    pub sketch: SketchChoice,
    /// Gram accuracy.
    #[arg(long, default_value_t = 0.25)]
    pub gram_eps: f64,
    /// Allowed failure probability.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Multiplier of the sketch-size formula.
    #[arg(long, default_value_t = sketchpcr::sketch::DEFAULT_GRAM_CONSTANT)]
    pub const_c: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Rank for the risk bound checks; skipped when absent.
    #[arg(long)]
    pub k: Option<usize>,
    /// Noise standard deviation for the risk bounds.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn open_out(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> anyhow::Result<()> {
    let mut out = open_out(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn emit_report(report: &RunReport, output: &OutputArgs) -> anyhow::Result<i32> {
    let mut out = open_out(output.out.as_deref())?;
    write_report(report, output.format, &mut out)?;
    if output.format == OutputFormat::Json {
        writeln!(out)?;
    }
    out.flush()?;
    let failed = report.failures();
    if failed > 0 {
        log::warn!("{failed} of {} runs failed", report.records.len());
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}

fn sweep_report(cfg: &ExperimentConfig) -> anyhow::Result<RunReport> {
    run_sweep(cfg).map_err(|e| match e {
        ConfigError::Load(e) => anyhow::Error::new(e),
        ConfigError::Invalid(m) => anyhow::anyhow!(m),
    })
}

/// Runs a parsed command and returns the process exit status.
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Solve(args) => {
            let mut cfg = ExperimentConfig::new(args.data.source(), vec![args.solver], vec![args.k]);
            cfg.center_response = args.data.center_response;
            cfg.sketch = args.sketch;
            let s = args.s.unwrap_or(4 * args.k);
            cfg.sizes = SizeAxis::Fixed(vec![s]);
            cfg.t = vec![args.t.unwrap_or(s)];
            cfg.seed0 = args.seed;
            cfg.eps = args.eps;
            emit_report(&sweep_report(&cfg)?, &args.output)
        }
        Command::Sweep(args) => {
            let mut cfg = ExperimentConfig::new(args.data.source(), args.solver, args.k);
            cfg.center_response = args.data.center_response;
            cfg.sketch = args.sketch;
            if !args.s.is_empty() {
                cfg.sizes = SizeAxis::Fixed(args.s);
            } else if !args.ratio.is_empty() {
                cfg.sizes = SizeAxis::Ratio(args.ratio);
            }
            cfg.t = args.t;
            cfg.seeds = args.seeds;
            cfg.seed0 = args.seed0;
            cfg.eps = args.eps;
            cfg.reference_budget = args.reference_budget;
            emit_report(&sweep_report(&cfg)?, &args.output)
        }
        Command::Stream(args) => {
            let summary = stream(&args)?;
            emit_json(&summary, args.out.as_deref())?;
            Ok(0)
        }
        Command::Kernel(args) => {
            let summary = kernel(&args)?;
            emit_json(&summary, args.out.as_deref())?;
            Ok(0)
        }
        Command::Verify(args) => {
            let summary = verify(&args)?;
            emit_json(&summary, args.out.as_deref())?;
            Ok(0)
        }
    }
}

#[derive(Debug, Serialize)]
pub struct StreamSummary {
    pub rows_seen: u64,
    pub k: usize,
    pub s: usize,
    pub t: usize,
    pub accumulator_bytes: usize,
    /// `‖TAx − Tb‖ / ‖Tb‖`.
    pub sketched_residual_rel: f64,
    pub x: Vec<f64>,
}

fn sketch_kind(choice: SketchChoice) -> SketchKind {
    match choice {
        SketchChoice::Countsketch => SketchKind::CountSketch,
        SketchChoice::Subgaussian => SketchKind::Subgaussian,
    }
}

pub fn stream(args: &StreamArgs) -> anyhow::Result<StreamSummary> {
    let kind = sketch_kind(args.sketch);
    let new_state = |d| StreamState::new(d, kind, args.s, kind, args.t, args.seed);
    let mut state = None;
    match Format::from_path(&args.data) {
        Format::Csv => {
            for row in CsvRows::open(&args.data)? {
                let (features, y) = row?;
                if state.is_none() {
                    if args.dim.is_some_and(|d| d != features.len()) {
                        bail!(
                            "--dim {} does not match {} CSV features",
                            args.dim.unwrap(),
                            features.len()
                        );
                    }
                    state = Some(new_state(features.len())?);
                }
                state.as_mut().unwrap().update(&features, y)?;
            }
        }
        Format::Svmlight => {
            let Some(d) = args.dim else {
                bail!("--dim is required for svmlight streams");
            };
            let st = state.insert(new_state(d)?);
            for row in SvmlightRows::open(&args.data)? {
                let (y, entries) = row?;
                st.update_sparse(&entries, y)?;
            }
        }
    }
    let Some(state) = state.filter(|s| s.rows_seen() > 0) else {
        bail!("{} has no data rows", args.data.display());
    };
    let (rows_seen, bytes) = (state.rows_seen(), state.accumulator_bytes());
    let (ta, tb) = (state.ta().clone(), state.tb().clone());
    let solution = state.finalize(args.k)?;
    let tb_norm = tb.norm();
    let resid = (ta * &solution.x - &tb).norm();
    Ok(StreamSummary {
        rows_seen,
        k: args.k,
        s: args.s,
        t: args.t,
        accumulator_bytes: bytes,
        sketched_residual_rel: if tb_norm > 0.0 { resid / tb_norm } else { resid },
        x: solution.x.iter().copied().collect(),
    })
}

#[derive(Debug, Serialize)]
pub struct KernelSummary {
    pub mode: String,
    pub degree: usize,
    pub offset: f64,
    pub rank: usize,
    pub sketch_cols: Option<usize>,
    pub train_rows: usize,
    /// `‖ŷ − b‖ / ‖b‖` on the training rows.
    pub train_residual_rel: f64,
    pub test_rows: Option<usize>,
    pub test_residual_rel: Option<f64>,
}

fn dense_data(source: &DataSource, center: bool) -> anyhow::Result<(DenseMatrix, DenseVector)> {
    let (a, b) = source.load(center).map_err(|e| match e {
        ConfigError::Load(e) => anyhow::Error::new(e),
        ConfigError::Invalid(m) => anyhow::anyhow!(m),
    })?;
    Ok((a.to_dense().into_owned(), b))
}

fn residual_rel(
    predict: impl Fn(&DenseVector) -> sketchpcr::Result<f64>,
    a: &DenseMatrix,
    b: &DenseVector,
) -> anyhow::Result<f64> {
    let mut sq = 0.0;
    for i in 0..a.nrows() {
        let r = predict(&a.row(i).transpose())? - b[i];
        sq += r * r;
    }
    let norm = b.norm();
    Ok(if norm > 0.0 { sq.sqrt() / norm } else { sq.sqrt() })
}

pub fn kernel(args: &KernelArgs) -> anyhow::Result<KernelSummary> {
    let (a, b) = dense_data(&args.data.source(), args.data.center_response)?;
    let spec = KernelSpec::new(args.degree, args.offset)?;
    let model = match args.mode {
        KernelMode::Exact => exact_kernel_pcr(&a, &b, args.rank, spec)?,
        KernelMode::Sketched => {
            let ts = SketchOperator::tensorsketch(
                args.degree,
                spec.feature_input_dim(a.ncols()),
                args.sketch_cols,
                args.seed,
            )?;
            sketched_kernel_pcr(&a, &b, args.rank, &ts, spec)?
        }
    };
    let predict = |z: &DenseVector| model.predict(z);
    let train_residual_rel = residual_rel(predict, &a, &b)?;
    let (test_rows, test_residual_rel) = match &args.test {
        Some(path) => {
            let (ta, tb) = load_data(path, false)?;
            let ta = ta.to_dense().into_owned();
            if ta.ncols() != a.ncols() {
                bail!(
                    "{} has {} features, training data has {}",
                    path.display(),
                    ta.ncols(),
                    a.ncols()
                );
            }
            (Some(ta.nrows()), Some(residual_rel(predict, &ta, &tb)?))
        }
        None => (None, None),
    };
    Ok(KernelSummary {
        mode: format!("{:?}", args.mode).to_lowercase(),
        degree: args.degree,
        offset: args.offset,
        rank: args.rank,
        sketch_cols: (args.mode == KernelMode::Sketched).then_some(args.sketch_cols),
        train_rows: a.nrows(),
        train_residual_rel,
        test_rows,
        test_residual_rel,
    })
}

#[derive(Debug, Serialize)]
pub struct GramCheck {
    pub sketch: SketchChoice,
    pub stable_rank: f64,
    pub eps: f64,
    pub delta: f64,
    pub constant: f64,
    pub rows: usize,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    pub within_delta: bool,
}

#[derive(Debug, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub risk: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifySummary {
    pub gram: GramCheck,
    pub bounds: Vec<BoundCheck>,
}

pub fn verify(args: &VerifyArgs) -> anyhow::Result<VerifySummary> {
    if args.trials == 0 {
        bail!("--trials must be positive");
    }
    let (a, b) = dense_data(&args.data.source(), args.data.center_response)?;
    let sr = stable_rank(&a)?;
    let rows = sketch_rows_for_gram_with(sketch_kind(args.sketch), sr, args.gram_eps, args.delta, args.const_c)?;
    let failures = (0..args.trials as u64)
        .map(|t| {
            let op = args.sketch.build(rows, a.nrows(), derive_seed(args.seed, t))?;
            Ok(!gram_error(&op, &a, args.gram_eps)?.pass)
        })
        .collect::<sketchpcr::Result<Vec<bool>>>()?
        .into_iter()
        .filter(|f| *f)
        .count();
    let failure_rate = failures as f64 / args.trials as f64;
    let gram = GramCheck {
        sketch: args.sketch,
        stable_rank: sr,
        eps: args.gram_eps,
        delta: args.delta,
        constant: args.const_c,
        rows,
        trials: args.trials,
        failures,
        failure_rate,
        within_delta: failure_rate <= args.delta,
    };
    let mut bounds = Vec::new();
    if let Some(k) = args.k {
        // The observed response stands in for the noiseless mean.
        let model = FixedDesignModel::new(a, b, args.sigma)?;
        for (name, kind) in [
            ("pcr", BoundKind::PcrCorollary),
            ("pcr-spectral-tail", BoundKind::OldPcr),
        ] {
            let report = risk_bound_check(&model, k, &kind)?;
            bounds.push(BoundCheck {
                name: name.to_string(),
                risk: report.risk,
                bound: report.bound,
                holds: report.holds(),
            });
        }
    }
    Ok(VerifySummary { gram, bounds })
}
