//! Langevin samplers: Metropolis-adjusted (MALA) and unadjusted (ULA).

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::samples::SampleSet;
use crate::targets::TargetModel;

/// ULA aborts once a state leaves this ball.
pub const DIVERGENCE_NORM: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Mala,
    Ula,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Mala => "mala",
            SamplerKind::Ula => "ula",
        }
    }
}

impl core::str::FromStr for SamplerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mala" => Ok(SamplerKind::Mala),
            "ula" => Ok(SamplerKind::Ula),
            other => Err(Error::InvalidArgument(alloc::format!("unknown sampler {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub sampler: SamplerKind,
    /// Step size `h`; proposals have covariance `h²Σ`.
    pub step: f64,
    /// Preconditioner `Σ`; `None` means the identity.
    pub sigma: Option<Matrix>,
    /// Retained states.
    pub n: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub initial: Vec<f64>,
}

impl ChainConfig {
    pub fn new(sampler: SamplerKind, step: f64, n: usize, initial: Vec<f64>) -> Self {
        ChainConfig { sampler, step, sigma: None, n, burn_in: 0, seed: 0, initial }
    }
}

/// Retained states and the fraction of accepted proposals (1 for ULA).
#[derive(Debug, Clone)]
pub struct Chain {
    pub samples: SampleSet,
    pub acceptance_rate: f64,
}

/// Validated step geometry shared by both samplers.
struct Proposal {
    h: f64,
    sigma: Matrix,
    chol: Cholesky,
    l: Matrix,
}

impl Proposal {
    fn new(cfg: &ChainConfig, d: usize) -> Result<Self> {
        if !(cfg.step > 0.0) || !cfg.step.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!("step size must be positive, got {}", cfg.step)));
        }
        if cfg.initial.len() != d {
            return Err(Error::Dimension(alloc::format!(
                "initial point has {} coordinates for a {d}-dimensional target",
                cfg.initial.len()
            )));
        }
        if cfg.n == 0 {
            return Err(Error::InvalidArgument("chain length must be at least 1".into()));
        }
        let sigma = match &cfg.sigma {
            Some(s) if s.rows() != d || s.cols() != d => {
                return Err(Error::Dimension(alloc::format!("preconditioner must be {d}x{d}")));
            }
            Some(s) => s.clone(),
            None => Matrix::identity(d),
        };
        if sigma.max_abs_asymmetry() > 1e-12 * sigma.max_diagonal().abs().max(1.0) {
            return Err(Error::InvalidArgument("preconditioner is not symmetric".into()));
        }
        let chol = Cholesky::factor(&sigma)
            .ok_or_else(|| Error::InvalidArgument("preconditioner is not positive definite".into()))?;
        let l = chol.factor_matrix();
        Ok(Proposal { h: cfg.step, sigma, chol, l })
    }

    /// `x + (h²/2) Σ g`.
    fn drift(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        let sg = self.sigma.matvec(g);
        let c = 0.5 * self.h * self.h;
        x.iter().zip(&sg).map(|(xi, si)| xi + c * si).collect()
    }

    /// `x + (h²/2) Σ g + h L ξ` with `Σ = LLᵀ`.
    fn step(&self, x: &[f64], g: &[f64], xi: &[f64]) -> Vec<f64> {
        let mut out = self.drift(x, g);
        let noise = self.l.matvec(xi);
        for (o, e) in out.iter_mut().zip(&noise) {
            *o += self.h * e;
        }
        out
    }

    /// `log q(to | from)` up to a constant shared by both directions.
    fn log_q(&self, to: &[f64], from: &[f64], g_from: &[f64]) -> f64 {
        let mean = self.drift(from, g_from);
        let mut r: Vec<f64> = to.iter().zip(&mean).map(|(a, b)| a - b).collect();
        self.chol.forward_in_place(&mut r);
        -0.5 * crate::linalg::dot(&r, &r) / (self.h * self.h)
    }
}

fn standard_normal_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn collect(points: Vec<f64>, grads: Vec<f64>, n: usize, d: usize) -> Result<SampleSet> {
    SampleSet::new(
        Matrix::from_row_major(n, d, points)?,
        Matrix::from_row_major(n, d, grads)?,
        Vec::new(),
    )
}

/// Metropolis-adjusted Langevin chain. Rejections repeat the current state,
/// so the output generally contains duplicates.
pub fn mala_chain(target: &dyn TargetModel, cfg: &ChainConfig) -> Result<Chain> {
    let d = target.dim();
    let prop = Proposal::new(cfg, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = cfg.initial.clone();
    let mut lp = target.log_density(&x);
    let mut g = target.gradient(&x);
    if !lp.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("log density at the initial point"));
    }
    let mut points = Vec::with_capacity(cfg.n * d);
    let mut grads = Vec::with_capacity(cfg.n * d);
    let mut accepted = 0usize;
    let total = cfg.burn_in + cfg.n;
    for step in 0..total {
        let xi = standard_normal_vec(&mut rng, d);
        let y = prop.step(&x, &g, &xi);
        let lp_y = target.log_density(&y);
        let g_y = target.gradient(&y);
        let u: f64 = rng.random();
        if lp_y.is_finite() && g_y.iter().all(|v| v.is_finite()) {
            let log_alpha = lp_y - lp + prop.log_q(&x, &y, &g_y) - prop.log_q(&y, &x, &g);
            if libm::log(u) < log_alpha {
                x = y;
                lp = lp_y;
                g = g_y;
                if step >= cfg.burn_in {
                    accepted += 1;
                }
            }
        }
        if step >= cfg.burn_in {
            points.extend_from_slice(&x);
            grads.extend_from_slice(&g);
        }
    }
    Ok(Chain { samples: collect(points, grads, cfg.n, d)?, acceptance_rate: accepted as f64 / cfg.n as f64 })
}

/// One unadjusted Langevin update with caller-supplied standard normal
/// noise `xi`; `ula_chain` draws `xi` from its RNG.
pub fn ula_step(x: &[f64], grad: &[f64], step: f64, sigma: Option<&Matrix>, xi: &[f64]) -> Result<Vec<f64>> {
    let cfg = ChainConfig { sigma: sigma.cloned(), ..ChainConfig::new(SamplerKind::Ula, step, 1, x.to_vec()) };
    let prop = Proposal::new(&cfg, x.len())?;
    Ok(prop.step(x, grad, xi))
}

/// Unadjusted Langevin chain: every proposal is kept.
pub fn ula_chain(target: &dyn TargetModel, cfg: &ChainConfig) -> Result<Chain> {
    let d = target.dim();
    let prop = Proposal::new(cfg, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = cfg.initial.clone();
    let mut g = target.gradient(&x);
    if !target.log_density(&x).is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("log density at the initial point"));
    }
    let mut points = Vec::with_capacity(cfg.n * d);
    let mut grads = Vec::with_capacity(cfg.n * d);
    for step in 0..cfg.burn_in + cfg.n {
        let xi = standard_normal_vec(&mut rng, d);
        x = prop.step(&x, &g, &xi);
        let norm = crate::linalg::norm2(&x);
        if !(norm <= DIVERGENCE_NORM) {
            return Err(Error::Divergence { step, norm });
        }
        g = target.gradient(&x);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step, norm });
        }
        if step >= cfg.burn_in {
            points.extend_from_slice(&x);
            grads.extend_from_slice(&g);
        }
    }
    Ok(Chain { samples: collect(points, grads, cfg.n, d)?, acceptance_rate: 1.0 })
}

/// Runs the sampler selected in `cfg`.
pub fn run_chain(target: &dyn TargetModel, cfg: &ChainConfig) -> Result<Chain> {
    match cfg.sampler {
        SamplerKind::Mala => mala_chain(target, cfg),
        SamplerKind::Ula => ula_chain(target, cfg),
    }
}

/// `n` independent `N(0, I_d)` draws with their scores `−x`.
pub fn iid_standard_normal(d: usize, n: usize, seed: u64) -> Result<SampleSet> {
    if d == 0 || n == 0 {
        return Err(Error::Empty("sample size or dimension"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    let grads = points.iter().map(|v: &f64| -v).collect();
    collect(points, grads, n, d)
}
