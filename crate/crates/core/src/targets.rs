//! Posterior targets with analytic score functions.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// An unnormalized log density and its gradient.
pub trait TargetModel {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    /// `log p(x)` up to an additive constant.
    fn log_density(&self, x: &[f64]) -> f64;
    /// Writes `∇log p(x)` into `out`.
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.gradient_into(x, &mut g);
        g
    }
}

/// Standard normal `N(0, I_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianTarget {
    dim: usize,
}

impl GaussianTarget {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(GaussianTarget { dim })
    }
}

/// `N(0, I_d)` target.
pub fn gaussian_target(d: usize) -> Result<GaussianTarget> {
    GaussianTarget::new(d)
}

impl TargetModel for GaussianTarget {
    fn name(&self) -> &str {
        "gaussian"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        -0.5 * dot(x, x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, v) in out.iter_mut().zip(x) {
            *o = -v;
        }
    }
}

/// `log(1 + eˣ)` without overflow.
#[inline]
pub fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Release and recapture counts for a Cormack–Jolly–Seber model over `T`
/// occasions: `released[i]` animals released at occasion `i+1` and
/// `recaptured[i][k]` of them first recaptured at occasion `k+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CjsData {
    released: Vec<f64>,
    recaptured: Vec<Vec<f64>>,
}

impl CjsData {
    /// `released` has `T − 1` entries; `recaptured` is `(T − 1) × T` with
    /// zeros on and below the diagonal (`k ≤ i`).
    pub fn new(released: Vec<f64>, recaptured: Vec<Vec<f64>>) -> Result<Self> {
        let rows = released.len();
        if rows < 2 {
            return Err(Error::InvalidData("need at least three capture occasions".into()));
        }
        if recaptured.len() != rows || recaptured.iter().any(|r| r.len() != rows + 1) {
            return Err(Error::InvalidData(alloc::format!(
                "recapture table must be {rows}x{} for {rows} release occasions",
                rows + 1
            )));
        }
        for (i, row) in recaptured.iter().enumerate() {
            if !(released[i] >= 0.0) || !released[i].is_finite() || libm::floor(released[i]) != released[i] {
                return Err(Error::InvalidData(alloc::format!("release count D{} is not a non-negative integer", i + 1)));
            }
            let mut total = 0.0;
            for (k, &y) in row.iter().enumerate() {
                if !(y >= 0.0) || !y.is_finite() || libm::floor(y) != y {
                    return Err(Error::InvalidData(alloc::format!(
                        "recapture count y[{}][{}] is not a non-negative integer",
                        i + 1,
                        k + 1
                    )));
                }
                if k <= i && y != 0.0 {
                    return Err(Error::InvalidData(alloc::format!(
                        "recapture count y[{}][{}] precedes its release",
                        i + 1,
                        k + 1
                    )));
                }
                total += y;
            }
            if released[i] - total < 0.0 {
                return Err(Error::InvalidData(alloc::format!(
                    "release cohort {} has more recaptures ({total}) than releases ({})",
                    i + 1,
                    released[i]
                )));
            }
        }
        Ok(CjsData { released, recaptured })
    }

    /// Number of capture occasions `T`.
    pub fn occasions(&self) -> usize {
        self.released.len() + 1
    }

    pub fn released(&self) -> &[f64] {
        &self.released
    }

    pub fn recaptured(&self) -> &[Vec<f64>] {
        &self.recaptured
    }
}

/// One probability factor `x_j` or `1 − x_j` of a cell probability.
#[derive(Debug, Clone, Copy)]
struct Factor {
    param: usize,
    complement: bool,
}

/// Cormack–Jolly–Seber posterior in logit coordinates.
///
/// Parameters are `(φ₁, …, φ_{T−2}, p₂, …, p_{T−1}, φ_{T−1}p_T)`, each mapped
/// to the real line by `x̃ = log(x / (1 − x))`; the prior on `x̃` is the
/// logistic density `eˣ̃ / (1 + eˣ̃)²` (uniform on the original scale).
#[derive(Debug, Clone)]
pub struct CjsTarget {
    data: CjsData,
    dim: usize,
    /// `cells[i]` lists `(k, factors)` for every `k > i`.
    cells: Vec<Vec<(usize, Vec<Factor>)>>,
    /// `dᵢ = Dᵢ − Σₖ yᵢₖ`.
    never_seen: Vec<f64>,
}

impl CjsTarget {
    pub fn new(data: CjsData) -> Self {
        let t = data.occasions();
        let phi = |j: usize| Factor { param: j - 1, complement: false };
        let p = |j: usize| Factor { param: (t - 2) + (j - 2), complement: false };
        let not_p = |j: usize| Factor { param: (t - 2) + (j - 2), complement: true };
        let last = Factor { param: 2 * t - 4, complement: false };
        let mut cells = Vec::with_capacity(t - 1);
        // occasions are 1-based below
        for i in 1..t {
            let mut row = Vec::new();
            for k in i + 1..=t {
                let mut factors = Vec::new();
                if k < t {
                    factors.push(phi(i));
                    for m in i + 1..k {
                        factors.push(phi(m));
                        factors.push(not_p(m));
                    }
                    factors.push(p(k));
                } else {
                    // φ_{T−1} p_T only enters through their product
                    if i < t - 1 {
                        factors.push(phi(i));
                        for m in i + 1..t - 1 {
                            factors.push(phi(m));
                            factors.push(not_p(m));
                        }
                        factors.push(not_p(t - 1));
                    }
                    factors.push(last);
                }
                row.push((k - 1, factors));
            }
            cells.push(row);
        }
        let never_seen = data
            .released
            .iter()
            .zip(&data.recaptured)
            .map(|(d, row)| d - row.iter().sum::<f64>())
            .collect();
        CjsTarget { dim: 2 * t - 3, data, cells, never_seen }
    }

    pub fn data(&self) -> &CjsData {
        &self.data
    }

    /// Maps logit coordinates back to probabilities.
    pub fn probabilities(x_tilde: &[f64]) -> Vec<f64> {
        x_tilde.iter().map(|&v| sigmoid(v)).collect()
    }

    fn log_prior(x_tilde: &[f64]) -> f64 {
        // log(eᵗ/(1+eᵗ)²) = −log(1+e⁻ᵗ) − log(1+eᵗ)
        x_tilde.iter().map(|&t| -log1p_exp(-t) - log1p_exp(t)).sum()
    }

    fn log_likelihood_and_gradient(&self, x_tilde: &[f64], grad: Option<&mut [f64]>) -> f64 {
        // log x = −log(1+e^{−t}),  log(1−x) = −log(1+eᵗ)
        let log_x: Vec<f64> = x_tilde.iter().map(|&t| -log1p_exp(-t)).collect();
        let log_1mx: Vec<f64> = x_tilde.iter().map(|&t| -log1p_exp(t)).collect();
        let x: Vec<f64> = x_tilde.iter().map(|&t| sigmoid(t)).collect();
        let mut ll = 0.0;
        let mut grad = grad;
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut dchi = vec![0.0; self.dim];
        for (i, row) in self.cells.iter().enumerate() {
            let mut cell_total = 0.0;
            dchi.iter_mut().for_each(|v| *v = 0.0);
            for (k, factors) in row {
                let log_pi: f64 = factors.iter().map(|f| if f.complement { log_1mx[f.param] } else { log_x[f.param] }).sum();
                let pi = libm::exp(log_pi);
                cell_total += pi;
                let y = self.data.recaptured[i][*k];
                if y != 0.0 {
                    ll += y * log_pi;
                }
                for f in factors {
                    // ∂ log x / ∂t = 1 − x,  ∂ log(1 − x) / ∂t = −x
                    let dlog = if f.complement { -x[f.param] } else { 1.0 - x[f.param] };
                    if let Some(g) = grad.as_deref_mut() {
                        g[f.param] += y * dlog;
                    }
                    dchi[f.param] -= pi * dlog;
                }
            }
            let chi = 1.0 - cell_total;
            let d = self.never_seen[i];
            if d != 0.0 {
                ll += d * libm::log(chi);
                if let Some(g) = grad.as_deref_mut() {
                    for (gj, dc) in g.iter_mut().zip(&dchi) {
                        *gj += d * dc / chi;
                    }
                }
            }
        }
        ll
    }

    pub fn log_likelihood(&self, x_tilde: &[f64]) -> f64 {
        self.log_likelihood_and_gradient(x_tilde, None)
    }
}

impl TargetModel for CjsTarget {
    fn name(&self) -> &str {
        "cjs"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.log_likelihood(x) + Self::log_prior(x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.log_likelihood_and_gradient(x, Some(out));
        for (o, &t) in out.iter_mut().zip(x) {
            *o += 1.0 - 2.0 * sigmoid(t);
        }
    }
}

/// Bayesian logistic regression with independent Gaussian priors.
#[derive(Debug, Clone)]
pub struct LogisticTarget {
    design: Matrix,
    response: Vec<f64>,
    prior_precision: Vec<f64>,
    name: String,
}

/// Prior standard deviation on the intercept.
pub const INTERCEPT_PRIOR_SD: f64 = 20.0;
/// Prior standard deviation on every predictor coefficient.
pub const PREDICTOR_PRIOR_SD: f64 = 5.0;

impl LogisticTarget {
    pub fn new(design: Matrix, response: Vec<f64>, prior_sd: Vec<f64>) -> Result<Self> {
        if design.rows() != response.len() {
            return Err(Error::Dimension(alloc::format!(
                "design has {} rows but the response has {} entries",
                design.rows(),
                response.len()
            )));
        }
        if prior_sd.len() != design.cols() {
            return Err(Error::Dimension(alloc::format!(
                "{} prior scales for {} coefficients",
                prior_sd.len(),
                design.cols()
            )));
        }
        if let Some(bad) = response.iter().find(|&&y| y != 0.0 && y != 1.0) {
            return Err(Error::InvalidData(alloc::format!("response values must be 0 or 1, found {bad}")));
        }
        if prior_sd.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument("prior standard deviations must be positive".into()));
        }
        if design.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        let prior_precision = prior_sd.iter().map(|s| 1.0 / (s * s)).collect();
        Ok(LogisticTarget { design, response, prior_precision, name: "logistic".into() })
    }

    /// Intercept in column 0 with an `N(0, 20²)` prior and `N(0, 5²)` on the rest.
    pub fn with_default_priors(design: Matrix, response: Vec<f64>) -> Result<Self> {
        let d = design.cols();
        let mut sd = vec![PREDICTOR_PRIOR_SD; d];
        if d > 0 {
            sd[0] = INTERCEPT_PRIOR_SD;
        }
        Self::new(design, response, sd)
    }

    pub fn design(&self) -> &Matrix {
        &self.design
    }

    pub fn log_likelihood(&self, beta: &[f64]) -> f64 {
        (0..self.design.rows())
            .map(|i| {
                let eta = dot(self.design.row(i), beta);
                self.response[i] * eta - log1p_exp(eta)
            })
            .sum()
    }
}

impl TargetModel for LogisticTarget {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.design.cols()
    }

    fn log_density(&self, beta: &[f64]) -> f64 {
        let prior: f64 = beta.iter().zip(&self.prior_precision).map(|(b, p)| -0.5 * p * b * b).sum();
        self.log_likelihood(beta) + prior
    }

    fn gradient_into(&self, beta: &[f64], out: &mut [f64]) {
        for (o, (b, p)) in out.iter_mut().zip(beta.iter().zip(&self.prior_precision)) {
            *o = -p * b;
        }
        for i in 0..self.design.rows() {
            let row = self.design.row(i);
            let resid = self.response[i] - sigmoid(dot(row, beta));
            crate::linalg::axpy(resid, row, out);
        }
    }
}

/// Rescales every column except the first (intercept) to standard deviation
/// `target_sd`. Columns are not centred; constant columns are left alone.
pub fn standardize_predictors(design: &Matrix, target_sd: f64) -> Matrix {
    let (n, d) = (design.rows(), design.cols());
    let mut out = design.clone();
    if n < 2 {
        return out;
    }
    for j in 1..d {
        let col = design.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        let sd = libm::sqrt(var);
        if sd > 0.0 {
            let s = target_sd / sd;
            for i in 0..n {
                out[(i, j)] *= s;
            }
        }
    }
    out
}
