//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use secf_core::estimators::Method;
use secf_core::integrands::predictive_probability;
use secf_core::kernel::{KernelFamily, DEFAULT_MATERN_NU};
use secf_core::nystrom::{NystromConfig, NystromSolver, SubsetSize, DEFAULT_CG_TOLERANCE};
use secf_core::samplers::{run_chain, ChainConfig, SamplerKind};
use secf_core::targets::{
    gaussian_target, sigmoid, standardize_predictors, CjsTarget, LogisticTarget, TargetModel,
};
use secf_core::SampleSet;
use serde_json::Value;

use crate::bench::{chain_benchmark, gaussian_benchmark};
use crate::error::{Result, SecfError};
use crate::io;
use crate::json::{self, Object};
use crate::run::{diagnostics_json, run_estimation, EstimationConfig};

#[derive(Debug, Parser)]
#[command(name = "secf", version, about = "Semi-exact control functionals for MCMC output")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the integral of one integrand column of a sample file.
    Estimate(EstimateArgs),
    /// Run a Langevin sampler and write a sample file.
    Sample(SampleArgs),
    /// Efficiency benchmarks against Monte Carlo.
    #[command(subcommand)]
    Benchmark(BenchmarkCommand),
    /// Kernel Stein discrepancy and error-bound proxy of the SECF weights.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Subcommand)]
pub enum BenchmarkCommand {
    /// I.i.d. standard normal samples with the built-in test integrand.
    Gaussian(GaussianBenchArgs),
    /// Replicate chains on a target with a supplied gold standard.
    Chain(ChainBenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Rq,
    Gaussian,
    Matern,
}

impl From<KernelArg> for KernelFamily {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Rq => KernelFamily::RationalQuadratic,
            KernelArg::Gaussian => KernelFamily::Gaussian,
            KernelArg::Matern => KernelFamily::Matern,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SolverArg {
    Cg,
    Direct,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TargetArg {
    Gaussian,
    Cjs,
    Logistic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SamplerArg {
    Mala,
    Ula,
}

/// Kernel, basis and Nyström settings shared by the estimating commands.
#[derive(Debug, Clone, Args)]
pub struct EstimatorArgs {
    #[arg(long, value_enum, default_value = "rq")]
    pub kernel: KernelArg,
    /// `auto-cv`, `auto-median` or a positive lengthscale.
    #[arg(long, default_value = "auto-cv")]
    pub lambda: String,
    /// Matérn smoothness.
    #[arg(long, default_value_t = DEFAULT_MATERN_NU)]
    pub nu: f64,
    /// Polynomial order r of the exactly integrated family.
    #[arg(long, default_value_t = 1)]
    pub order: u32,
    /// Nyström subset size: `auto` (⌈√n⌉) or an integer.
    #[arg(long, default_value = "auto")]
    pub n0: String,
    #[arg(long, default_value_t = DEFAULT_CG_TOLERANCE)]
    pub cg_tol: f64,
    #[arg(long)]
    pub cg_max_iters: Option<usize>,
    #[arg(long, value_enum, default_value = "cg")]
    pub solver: SolverArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl EstimatorArgs {
    fn config(&self, method: Method) -> Result<EstimationConfig> {
        let n0 = match self.n0.as_str() {
            "auto" => SubsetSize::Auto,
            s => SubsetSize::Fixed(
                s.parse().map_err(|_| SecfError::Input(format!("--n0 must be auto or an integer, got {s:?}")))?,
            ),
        };
        Ok(EstimationConfig {
            family: self.kernel.into(),
            lambda: self.lambda.parse()?,
            nu: self.nu,
            order: self.order,
            nystrom: NystromConfig {
                n0,
                cg_tolerance: self.cg_tol,
                cg_max_iters: self.cg_max_iters,
                seed: self.seed,
                solver: match self.solver {
                    SolverArg::Cg => NystromSolver::ConjugateGradient,
                    SolverArg::Direct => NystromSolver::Direct,
                },
            },
            seed: self.seed,
            ..EstimationConfig::new(method)
        })
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub samples: PathBuf,
    /// Integrand column, without the `f_` prefix.
    #[arg(long)]
    pub integrand: String,
    #[arg(long, default_value = "secf")]
    pub method: String,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Include the cubature weights in the output.
    #[arg(long)]
    pub emit_weights: bool,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Target model and sampler settings.
#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[arg(long, value_enum)]
    pub target: TargetArg,
    /// Count table (cjs) or design matrix with a `y` column (logistic).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Dimension of the Gaussian target.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Use the design matrix as given instead of scaling predictors to sd 0.5.
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long, value_enum, default_value = "mala")]
    pub sampler: SamplerArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,
    #[arg(long)]
    pub step: f64,
    /// `identity` or a CSV file holding the preconditioner matrix.
    #[arg(long, default_value = "identity")]
    pub sigma: String,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GaussianBenchArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    /// Comma-separated list of mc, zv, cf, secf, asecf.
    #[arg(long, default_value = "mc,zv,cf,secf")]
    pub methods: String,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChainBenchArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// `coord:K` (K-th coordinate, mapped to a probability for cjs) or
    /// `predictive:v1,v2,...` (logistic predictive probability).
    #[arg(long)]
    pub integrand: String,
    #[arg(long)]
    pub gold: f64,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, default_value = "mc,zv,cf,secf")]
    pub methods: String,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub integrand: String,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    let text = json::to_string(value)?;
    match out {
        Some(path) => io::write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_methods(list: &str) -> Result<Vec<Method>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Method>().map_err(|e| SecfError::Input(e.to_string())))
        .collect()
}

fn integrand_values<'a>(samples: &'a SampleSet, name: &str) -> Result<&'a [f64]> {
    samples.integrand(name).ok_or_else(|| {
        let known: Vec<&str> = samples.integrands().iter().map(|(n, _)| n.as_str()).collect();
        SecfError::Input(format!("no integrand column f_{name}; available: {}", known.join(", ")))
    })
}

fn require_data(args: &ChainArgs) -> Result<&Path> {
    args.data.as_deref().ok_or_else(|| SecfError::Input("this target needs --data".into()))
}

fn build_target(args: &ChainArgs) -> Result<Box<dyn TargetModel>> {
    Ok(match args.target {
        TargetArg::Gaussian => Box::new(gaussian_target(args.dim).map_err(|e| SecfError::Input(e.to_string()))?),
        TargetArg::Cjs => Box::new(CjsTarget::new(io::load_cjs_table(require_data(args)?)?)),
        TargetArg::Logistic => {
            let path = require_data(args)?;
            let (mut design, y) = io::load_design(path)?;
            if !args.no_standardize {
                design = standardize_predictors(&design, 0.5);
            }
            Box::new(LogisticTarget::with_default_priors(design, y).map_err(|e| SecfError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?)
        }
    })
}

fn chain_config(args: &ChainArgs, d: usize, seed: u64) -> Result<ChainConfig> {
    let sigma = match args.sigma.as_str() {
        "identity" => None,
        file => Some(io::load_matrix(Path::new(file))?),
    };
    let sampler = match args.sampler {
        SamplerArg::Mala => SamplerKind::Mala,
        SamplerArg::Ula => SamplerKind::Ula,
    };
    Ok(ChainConfig { sigma, burn_in: args.burn_in, seed, ..ChainConfig::new(sampler, args.step, args.n, vec![0.0; d]) })
}

/// Integrand columns written by `sample`: coordinates (as probabilities for
/// the capture-recapture target).
fn coordinate_columns(target: TargetArg, samples: &SampleSet) -> Vec<(String, Vec<f64>)> {
    (0..samples.dim())
        .map(|k| {
            let col = samples.points().column(k);
            let col = match target {
                TargetArg::Cjs => col.into_iter().map(sigmoid).collect(),
                _ => col,
            };
            (format!("x{}", k + 1), col)
        })
        .collect()
}

type Integrand = Box<dyn Fn(&[f64]) -> f64>;

fn chain_integrand(text: &str, target: TargetArg, d: usize) -> Result<Integrand> {
    let bad = || SecfError::Input(format!("--integrand must be coord:K or predictive:v1,...; got {text:?}"));
    if let Some(k) = text.strip_prefix("coord:") {
        let k: usize = k.parse().map_err(|_| bad())?;
        if k == 0 || k > d {
            return Err(SecfError::Input(format!("coordinate {k} is out of range 1..={d}")));
        }
        return Ok(match target {
            TargetArg::Cjs => Box::new(move |x: &[f64]| sigmoid(x[k - 1])),
            _ => Box::new(move |x: &[f64]| x[k - 1]),
        });
    }
    if let Some(list) = text.strip_prefix("predictive:") {
        let row: Vec<f64> = list.split(',').map(|v| v.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
        if row.len() != d {
            return Err(SecfError::Input(format!("predictive row has {} entries for dimension {d}", row.len())));
        }
        return Ok(Box::new(move |x: &[f64]| predictive_probability(&row, x).unwrap_or(f64::NAN)));
    }
    Err(bad())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate(args) => {
            let method: Method = args.method.parse().map_err(|e: secf_core::Error| SecfError::Input(e.to_string()))?;
            let samples = io::load_samples(&args.samples)?;
            let f = integrand_values(&samples, &args.integrand)?;
            let est = run_estimation(&samples, f, &args.estimator.config(method)?)?;
            emit(&est.to_json(args.emit_weights), args.out.as_deref())
        }
        Command::Sample(args) => {
            let target = build_target(&args.chain)?;
            let cfg = chain_config(&args.chain, target.dim(), args.seed)?;
            let chain = run_chain(target.as_ref(), &cfg).map_err(SecfError::core("sampling"))?;
            let mut samples = chain.samples;
            for (name, col) in coordinate_columns(args.chain.target, &samples.clone()) {
                samples = samples.with_integrand(name, col).map_err(SecfError::core("sampling"))?;
            }
            io::write_samples(&samples, &args.out)?;
            eprintln!("{} states written, acceptance rate {:.3}", samples.len(), chain.acceptance_rate);
            Ok(())
        }
        Command::Benchmark(BenchmarkCommand::Gaussian(args)) => {
            let methods = parse_methods(&args.methods)?
                .into_iter()
                .map(|m| args.estimator.config(m))
                .collect::<Result<Vec<_>>>()?;
            let report = gaussian_benchmark(args.d, args.n, args.replicates, &methods, args.estimator.seed)?;
            emit(&report.to_json(), args.out.as_deref())
        }
        Command::Benchmark(BenchmarkCommand::Chain(args)) => {
            let target = build_target(&args.chain)?;
            let chain = chain_config(&args.chain, target.dim(), args.estimator.seed)?;
            let f = chain_integrand(&args.integrand, args.chain.target, target.dim())?;
            let methods = parse_methods(&args.methods)?
                .into_iter()
                .map(|m| args.estimator.config(m))
                .collect::<Result<Vec<_>>>()?;
            let report =
                chain_benchmark(target.as_ref(), &chain, &methods, &f, args.gold, args.replicates, args.estimator.seed)?;
            emit(&report.to_json(), args.out.as_deref())
        }
        Command::Diagnose(args) => {
            let samples = io::load_samples(&args.samples)?;
            let f = integrand_values(&samples, &args.integrand)?;
            let est = run_estimation(&samples, f, &args.estimator.config(Method::Secf)?)?;
            let diag = est.result.diagnostics.expect("SECF always reports diagnostics");
            let value = Object::new()
                .field("method", "secf")
                .float("estimate", est.result.estimate)
                .field("n", est.n)
                .float("lambda", est.kernel.map_or(f64::NAN, |k| k.lambda()))
                .field("diagnostics", diagnostics_json(&diag))
                .build();
            emit(&value, args.out.as_deref())
        }
    }
}
