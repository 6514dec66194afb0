//! Estimator dispatch: deduplication, lengthscale choice, timing and the
//! JSON record of one estimate.

use std::str::FromStr;
use std::time::Instant;

use secf_core::basis::{enumerate_basis, vandermonde};
use secf_core::estimators::{cf_estimate, mc_estimate, secf_estimate, zv_estimate, EstimatorResult, Method};
use secf_core::kernel::{assemble_stein_matrix, KernelConfig, KernelFamily, DEFAULT_MATERN_NU};
use secf_core::nystrom::{asecf_estimate, NystromConfig};
use secf_core::tuning::{cv_select_lambda, default_grid, median_heuristic, DEFAULT_FOLDS};
use secf_core::SampleSet;
use serde_json::Value;

use crate::error::{Result, SecfError};
use crate::json::Object;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    Fixed(f64),
    AutoCv,
    AutoMedian,
}

impl FromStr for LambdaChoice {
    type Err = SecfError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto-cv" => Ok(LambdaChoice::AutoCv),
            "auto-median" => Ok(LambdaChoice::AutoMedian),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0 && v.is_finite())
                .map(LambdaChoice::Fixed)
                .ok_or_else(|| SecfError::Input(format!("lambda must be auto-cv, auto-median or a positive number, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimationConfig {
    pub method: Method,
    pub family: KernelFamily,
    pub lambda: LambdaChoice,
    pub nu: f64,
    pub order: u32,
    pub nystrom: NystromConfig,
    pub seed: u64,
    pub cv_grid: Vec<f64>,
}

impl EstimationConfig {
    pub fn new(method: Method) -> Self {
        EstimationConfig {
            method,
            family: KernelFamily::RationalQuadratic,
            lambda: LambdaChoice::AutoCv,
            nu: DEFAULT_MATERN_NU,
            order: 1,
            nystrom: NystromConfig::default(),
            seed: 0,
            cv_grid: default_grid(),
        }
    }
}

/// One estimate together with the settings that produced it.
#[derive(Debug, Clone)]
pub struct Estimation {
    pub result: EstimatorResult,
    /// Kernel actually used, after tuning.
    pub kernel: Option<KernelConfig>,
    pub basis_order: Option<u32>,
    /// Points used, after deduplication.
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

impl Estimation {
    pub fn to_json(&self, emit_weights: bool) -> Value {
        let r = &self.result;
        let mut obj = Object::new()
            .field("method", r.method.name())
            .float("estimate", r.estimate)
            .field("n", self.n)
            .field("d", self.d);
        if let Some(k) = &self.kernel {
            let mut kernel = Object::new().field("family", k.family().name()).float("lambda", k.lambda());
            if k.family() == KernelFamily::Matern {
                kernel = kernel.float("nu", k.nu());
            }
            obj = obj.field("kernel", kernel.build());
        }
        if let Some(order) = self.basis_order {
            obj = obj.field("basis_order", order);
        }
        if emit_weights {
            if let Some(w) = &r.weights {
                obj = obj.floats("weights", w);
            }
        }
        if let Some(diag) = &r.diagnostics {
            obj = obj.field("diagnostics", diagnostics_json(diag));
        }
        if let Some(info) = &r.nystrom {
            obj = obj.field(
                "nystrom",
                Object::new()
                    .field("n0", info.n0)
                    .field("iterations", info.iterations)
                    .float("residual", info.residual)
                    .field("converged", info.converged)
                    .build(),
            );
        }
        obj.float("wall_time_s", r.wall_time).field("seed", self.seed).build()
    }
}

pub fn diagnostics_json(d: &secf_core::DiagnosticReport) -> Value {
    Object::new()
        .float("ksd", d.ksd)
        .float("seminorm_proxy", d.seminorm_proxy)
        .float("bound_product", d.bound_product)
        .build()
}

fn select_lambda(cfg: &EstimationConfig, samples: &SampleSet, fvals: &[f64], order: u32) -> Result<KernelConfig> {
    let template = |lambda| KernelConfig::new(cfg.family, lambda, cfg.nu).map_err(SecfError::core("kernel configuration"));
    match cfg.lambda {
        LambdaChoice::Fixed(l) => template(l),
        LambdaChoice::AutoMedian => {
            let l = median_heuristic(samples.points()).map_err(SecfError::core("median heuristic"))?;
            template(l)
        }
        LambdaChoice::AutoCv => {
            let basis = enumerate_basis(samples.dim(), order).map_err(SecfError::core("basis"))?;
            let k = template(1.0)?;
            let out = cv_select_lambda(&k, samples, fvals, &basis, &cfg.cv_grid, DEFAULT_FOLDS, cfg.seed)
                .map_err(SecfError::core("cross-validation"))?;
            template(out.lambda)
        }
    }
}

/// Runs one estimator on `fvals` over `samples`. Kernel methods work on the
/// deduplicated sample; the reported wall time covers tuning and assembly.
pub fn run_estimation(samples: &SampleSet, fvals: &[f64], cfg: &EstimationConfig) -> Result<Estimation> {
    if fvals.len() != samples.len() {
        return Err(SecfError::Input(format!("{} integrand values for {} samples", fvals.len(), samples.len())));
    }
    let start = Instant::now();
    let method = cfg.method;
    let context = |what: &str| SecfError::core(format!("{} {what}", method.name()));
    let (samples, fvals) = if method.uses_kernel() {
        let keep = secf_core::samples::distinct_rows(samples.points());
        (samples.select(&keep), keep.iter().map(|&i| fvals[i]).collect::<Vec<_>>())
    } else {
        (samples.clone(), fvals.to_vec())
    };
    let (n, d) = (samples.len(), samples.dim());
    let order = match method {
        Method::Mc => None,
        Method::Cf => Some(0),
        _ => Some(cfg.order),
    };
    let kernel = if method.uses_kernel() { Some(select_lambda(cfg, &samples, &fvals, order.unwrap_or(0))?) } else { None };
    let p = match order {
        Some(r) if method.uses_basis() => {
            let basis = enumerate_basis(d, r).map_err(context("basis"))?;
            Some(vandermonde(&basis, &samples).map_err(context("basis"))?)
        }
        _ => None,
    };
    let mut result = match method {
        Method::Mc => mc_estimate(&fvals).map_err(context("estimate"))?,
        Method::Zv => zv_estimate(p.as_ref().unwrap(), &fvals).map_err(context("estimate"))?,
        Method::Cf | Method::Secf => {
            let k0 = assemble_stein_matrix(kernel.as_ref().unwrap(), &samples).map_err(context("kernel matrix"))?;
            if method == Method::Cf {
                cf_estimate(&k0, &fvals).map_err(context("estimate"))?
            } else {
                secf_estimate(&k0, p.as_ref().unwrap(), &fvals).map_err(context("estimate"))?
            }
        }
        Method::Asecf => asecf_estimate(kernel.as_ref().unwrap(), &samples, p.as_ref().unwrap(), &fvals, &cfg.nystrom)
            .map_err(context("estimate"))?,
    };
    result.wall_time = start.elapsed().as_secs_f64();
    Ok(Estimation { result, kernel, basis_order: order, n, d, seed: cfg.seed })
}
