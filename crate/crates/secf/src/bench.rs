//! Efficiency benchmarks: the same `R` sample sets are given to every
//! method, and each is compared to plain Monte Carlo through
//! `Ê = MSE_MC / MSE` and `Ĉ = Ê · T_MC / T`.

use std::time::Instant;

use secf_core::estimators::Method;
use secf_core::integrands::{gaussian_test_integrand, GAUSSIAN_TEST_VALUE};
use secf_core::samplers::{iid_standard_normal, run_chain, ChainConfig};
use secf_core::targets::TargetModel;
use secf_core::SampleSet;
use serde_json::Value;

use crate::error::{Result, SecfError};
use crate::json::{num, Object};
use crate::run::{run_estimation, EstimationConfig};

/// Below this MSE an estimator is reported as exact instead of dividing by
/// (near) zero.
pub const EXACT_MSE: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Efficiency {
    Finite(f64),
    Exact,
}

impl Efficiency {
    pub fn value(self) -> f64 {
        match self {
            Efficiency::Finite(v) => v,
            Efficiency::Exact => f64::INFINITY,
        }
    }

    fn to_json(self) -> Value {
        match self {
            Efficiency::Finite(v) => num(v),
            Efficiency::Exact => Value::from("exact"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MethodReport {
    pub method: Method,
    pub mse: f64,
    pub statistical: Efficiency,
    pub computational: Efficiency,
    /// Mean seconds per replicate, sampling included.
    pub mean_wall_time: f64,
    pub estimates: Vec<f64>,
    /// `bound_product` per replicate when the method reports diagnostics.
    pub bounds: Vec<Option<f64>>,
    pub lambdas: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct EfficiencyReport {
    pub replicates: usize,
    pub truth: f64,
    pub methods: Vec<MethodReport>,
    pub config: Value,
}

impl EfficiencyReport {
    pub fn method(&self, m: Method) -> Option<&MethodReport> {
        self.methods.iter().find(|r| r.method == m)
    }

    pub fn to_json(&self) -> Value {
        let methods: Vec<Value> = self
            .methods
            .iter()
            .map(|r| {
                Object::new()
                    .field("method", r.method.name())
                    .float("mse", r.mse)
                    .field("statistical_efficiency", r.statistical.to_json())
                    .field("computational_efficiency", r.computational.to_json())
                    .float("mean_wall_time_s", r.mean_wall_time)
                    .floats("estimates", &r.estimates)
                    .build()
            })
            .collect();
        Object::new()
            .field("replicates", self.replicates)
            .float("truth", self.truth)
            .field("timing", "sampling plus estimation, per replicate")
            .field("methods", Value::Array(methods))
            .field("config", self.config.clone())
            .build()
    }
}

struct Accumulator {
    cfg: EstimationConfig,
    estimates: Vec<f64>,
    bounds: Vec<Option<f64>>,
    lambdas: Vec<Option<f64>>,
    time: f64,
}

/// Shared replicate loop. `draw(r)` returns replicate `r`'s samples and
/// integrand values; its time is charged to every method.
fn benchmark(
    methods: &[EstimationConfig],
    replicates: usize,
    seed: u64,
    truth: f64,
    config: Value,
    mut draw: impl FnMut(u64) -> Result<(SampleSet, Vec<f64>)>,
) -> Result<EfficiencyReport> {
    if replicates == 0 {
        return Err(SecfError::Input("at least one replicate is needed".into()));
    }
    let mut configs: Vec<EstimationConfig> = Vec::new();
    if !methods.iter().any(|m| m.method == Method::Mc) {
        configs.push(EstimationConfig::new(Method::Mc));
    }
    configs.extend(methods.iter().cloned());
    let mut acc: Vec<Accumulator> = configs
        .into_iter()
        .map(|cfg| Accumulator { cfg, estimates: Vec::new(), bounds: Vec::new(), lambdas: Vec::new(), time: 0.0 })
        .collect();
    for r in 0..replicates {
        let replicate_seed = seed ^ r as u64;
        let start = Instant::now();
        let (samples, fvals) = draw(replicate_seed)?;
        let sampling = start.elapsed().as_secs_f64();
        for a in acc.iter_mut() {
            let cfg = EstimationConfig { seed: replicate_seed, ..a.cfg.clone() };
            let est = run_estimation(&samples, &fvals, &cfg).map_err(|e| match e {
                SecfError::Core { context, source } => {
                    SecfError::Core { context: format!("replicate {r}: {context}"), source }
                }
                other => other,
            })?;
            a.estimates.push(est.result.estimate);
            a.bounds.push(est.result.diagnostics.map(|d| d.bound_product));
            a.lambdas.push(est.kernel.map(|k| k.lambda()));
            a.time += sampling + est.result.wall_time;
        }
    }
    let reps = replicates as f64;
    let mse = |a: &Accumulator| a.estimates.iter().map(|e| (e - truth) * (e - truth)).sum::<f64>() / reps;
    let mc = acc.iter().find(|a| a.cfg.method == Method::Mc).expect("MC is always present");
    let (mse_mc, time_mc) = (mse(mc), mc.time / reps);
    let reports = acc
        .iter()
        .map(|a| {
            let m = mse(a);
            let t = a.time / reps;
            let statistical = if a.cfg.method == Method::Mc {
                Efficiency::Finite(1.0)
            } else if m < EXACT_MSE {
                Efficiency::Exact
            } else {
                Efficiency::Finite(mse_mc / m)
            };
            let computational = match statistical {
                Efficiency::Finite(e) => Efficiency::Finite(e * time_mc / t),
                Efficiency::Exact => Efficiency::Exact,
            };
            MethodReport {
                method: a.cfg.method,
                mse: m,
                statistical,
                computational,
                mean_wall_time: t,
                estimates: a.estimates.clone(),
                bounds: a.bounds.clone(),
                lambdas: a.lambdas.clone(),
            }
        })
        .collect();
    Ok(EfficiencyReport { replicates, truth, methods: reports, config })
}

/// I.i.d. `N(0, I_d)` samples with a caller-chosen integrand and true value.
pub fn gaussian_benchmark_with(
    d: usize,
    n: usize,
    replicates: usize,
    methods: &[EstimationConfig],
    seed: u64,
    integrand: &dyn Fn(&[f64]) -> f64,
    truth: f64,
) -> Result<EfficiencyReport> {
    let config = Object::new()
        .field("benchmark", "gaussian")
        .field("d", d)
        .field("n", n)
        .field("seed", seed)
        .field("methods", methods.iter().map(|m| m.method.name()).collect::<Vec<_>>())
        .build();
    benchmark(methods, replicates, seed, truth, config, |s| {
        let samples = iid_standard_normal(d, n, s).map_err(SecfError::core("sampling"))?;
        let f = (0..n).map(|i| integrand(samples.point(i))).collect();
        Ok((samples, f))
    })
}

/// The built-in test integrand `1 + x₂ + 0.1x₁x₂x₃ + sin(x₁)exp[−(x₂x₃)²]`
/// under `N(0, I_d)`, whose integral is 1.
pub fn gaussian_benchmark(
    d: usize,
    n: usize,
    replicates: usize,
    methods: &[EstimationConfig],
    seed: u64,
) -> Result<EfficiencyReport> {
    if d < 3 {
        return Err(SecfError::Input(format!("the Gaussian benchmark needs d >= 3, got {d}")));
    }
    gaussian_benchmark_with(d, n, replicates, methods, seed, &gaussian_test_integrand, GAUSSIAN_TEST_VALUE)
}

/// Runs `replicates` independent chains (seeds `seed ⊕ r`) and scores each
/// method against a caller-supplied gold standard.
pub fn chain_benchmark(
    target: &dyn TargetModel,
    chain: &ChainConfig,
    methods: &[EstimationConfig],
    integrand: &dyn Fn(&[f64]) -> f64,
    gold: f64,
    replicates: usize,
    seed: u64,
) -> Result<EfficiencyReport> {
    let config = Object::new()
        .field("benchmark", "chain")
        .field("target", target.name())
        .field("sampler", chain.sampler.name())
        .float("step", chain.step)
        .field("n", chain.n)
        .field("burn_in", chain.burn_in)
        .field("seed", seed)
        .field("methods", methods.iter().map(|m| m.method.name()).collect::<Vec<_>>())
        .build();
    benchmark(methods, replicates, seed, gold, config, |s| {
        let cfg = ChainConfig { seed: s, ..chain.clone() };
        let out = run_chain(target, &cfg).map_err(SecfError::core("sampling"))?;
        let f = (0..out.samples.len()).map(|i| integrand(out.samples.point(i))).collect();
        Ok((out.samples, f))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::LambdaChoice;
    use secf_core::samplers::SamplerKind;
    use secf_core::targets::gaussian_target;

    fn secf(order: u32) -> EstimationConfig {
        EstimationConfig { order, lambda: LambdaChoice::Fixed(1.0), ..EstimationConfig::new(Method::Secf) }
    }

    #[test]
    fn monte_carlo_has_unit_efficiency() {
        let r = gaussian_benchmark(3, 20, 1, &[EstimationConfig::new(Method::Mc)], 5).unwrap();
        assert_eq!(r.methods.len(), 1);
        assert_eq!(r.methods[0].statistical, Efficiency::Finite(1.0));
        let json = crate::json::to_string(&r.to_json()).unwrap();
        assert!(json.contains("\"statistical_efficiency\":1.0000000000000000e0"));
    }

    #[test]
    fn polynomial_integrand_is_exact() {
        // 1 + 𝓛(x₁x₂ + x₃²) = 1 + 2 − 2x₁x₂ − 2x₃² under N(0, I)
        let f = |x: &[f64]| 3.0 - 2.0 * x[0] * x[1] - 2.0 * x[2] * x[2];
        let r = gaussian_benchmark_with(3, 40, 2, &[secf(2)], 1, &f, 1.0).unwrap();
        let s = r.method(Method::Secf).unwrap();
        assert!(s.mse < 1e-24);
        assert_eq!(s.statistical, Efficiency::Exact);
        assert!(crate::json::to_string(&r.to_json()).unwrap().contains("\"exact\""));
        assert_eq!(r.method(Method::Mc).unwrap().statistical, Efficiency::Finite(1.0));
    }

    #[test]
    fn benchmarks_are_reproducible() {
        let a = gaussian_benchmark(3, 30, 2, &[secf(1)], 8).unwrap();
        let b = gaussian_benchmark(3, 30, 2, &[secf(1)], 8).unwrap();
        assert_eq!(a.methods[1].estimates, b.methods[1].estimates);
        assert!(gaussian_benchmark(2, 30, 2, &[secf(1)], 8).is_err());
    }

    #[test]
    fn chain_benchmark_routes_the_sampler() {
        let t = gaussian_target(2).unwrap();
        let f = |x: &[f64]| x[0];
        for kind in [SamplerKind::Mala, SamplerKind::Ula] {
            let chain = ChainConfig::new(kind, 0.9, 200, vec![0.0, 0.0]);
            let r = chain_benchmark(&t, &chain, &[EstimationConfig::new(Method::Mc)], &f, 0.0, 1, 3).unwrap();
            assert_eq!(r.methods[0].statistical, Efficiency::Finite(1.0));
            assert_eq!(r.config["sampler"], kind.name());
        }
    }
}
