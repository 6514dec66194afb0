//! Radial base kernels `k(x, y) = Ψ(‖x − y‖²)`, their radial derivatives and
//! the Langevin Stein kernel `k₀ = 𝓛ₓ𝓛ᵧ k`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, Cholesky, Matrix};
use crate::samples::SampleSet;
use crate::special::{bessel_k, gamma};

/// Below this squared distance the Matérn products `zΨ⁽³⁾` and `z²Ψ⁽⁴⁾` are
/// replaced by their right limit, zero.
pub const MATERN_Z_FLOOR: f64 = 1e-12;
pub const DEFAULT_MATERN_NU: f64 = 4.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    RationalQuadratic,
    Gaussian,
    Matern,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::RationalQuadratic => "rq",
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Matern => "matern",
        }
    }
}

impl core::str::FromStr for KernelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rq" | "rational-quadratic" | "rationalquadratic" => Ok(KernelFamily::RationalQuadratic),
            "gaussian" | "rbf" => Ok(KernelFamily::Gaussian),
            "matern" => Ok(KernelFamily::Matern),
            other => Err(Error::InvalidKernel(alloc::format!("unknown kernel family {other:?}"))),
        }
    }
}

/// A validated radial base kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    family: KernelFamily,
    lambda: f64,
    nu: f64,
    // Matérn constants b·c^4 and c² cached at construction.
    matern_b: f64,
    matern_c: f64,
}

impl KernelConfig {
    pub fn new(family: KernelFamily, lambda: f64, nu: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidKernel(alloc::format!("lengthscale must be positive, got {lambda}")));
        }
        let (mut matern_b, mut matern_c) = (0.0, 0.0);
        if family == KernelFamily::Matern {
            if !nu.is_finite() || !(libm::ceil(nu) > 2.0) {
                return Err(Error::InvalidKernel(alloc::format!(
                    "Matérn smoothness needs ceil(nu) > 2, got nu = {nu}"
                )));
            }
            matern_b = libm::pow(2.0, 1.0 - nu) / gamma(nu);
            matern_c = libm::sqrt(2.0 * nu) / lambda;
            if !matern_b.is_finite() || matern_b == 0.0 {
                return Err(Error::InvalidKernel(alloc::format!("Matérn smoothness {nu} is too large")));
            }
        }
        Ok(KernelConfig { family, lambda, nu, matern_b, matern_c })
    }

    pub fn rational_quadratic(lambda: f64) -> Result<Self> {
        Self::new(KernelFamily::RationalQuadratic, lambda, DEFAULT_MATERN_NU)
    }

    pub fn gaussian(lambda: f64) -> Result<Self> {
        Self::new(KernelFamily::Gaussian, lambda, DEFAULT_MATERN_NU)
    }

    pub fn matern(lambda: f64, nu: f64) -> Result<Self> {
        Self::new(KernelFamily::Matern, lambda, nu)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Smoothness; only meaningful for the Matérn family.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Same family and smoothness, new lengthscale.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.family, lambda, self.nu)
    }

    /// `t^μ K_μ(t)` with its `t → 0` limit `2^{μ−1} Γ(μ)` for `μ > 0`.
    fn matern_scaled(&self, mu: f64, t: f64) -> f64 {
        let k = if t > 0.0 { bessel_k(mu, t) } else { f64::INFINITY };
        if k.is_finite() {
            return libm::pow(t, mu) * k;
        }
        if mu > 0.0 {
            libm::pow(2.0, mu - 1.0) * gamma(mu)
        } else {
            f64::INFINITY
        }
    }

    fn matern_derivative(&self, z: f64, j: usize) -> f64 {
        let (b, c) = (self.matern_b, self.matern_c);
        let t = c * libm::sqrt(z);
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        // Ψ⁽ʲ⁾(z) = (−1)ʲ b c^{2j} 2^{−j} t^{ν−j} K_{ν−j}(t)
        let scale = sign * b * libm::pow(c, 2.0 * j as f64) / libm::pow(2.0, j as f64);
        scale * self.matern_scaled(self.nu - j as f64, t)
    }

    /// `Ψ⁽ʲ⁾(z)` for `j ∈ 0..=4`.
    ///
    /// For the Matérn family at `z = 0` the right limit is returned; it is
    /// infinite when `ν ≤ j`, in which case the radial Stein kernel only
    /// ever uses the vanishing products `zΨ⁽³⁾` and `z²Ψ⁽⁴⁾`.
    pub fn psi_derivative(&self, z: f64, j: usize) -> Result<f64> {
        if j > 4 {
            return Err(Error::DerivativeOrder(j));
        }
        if !z.is_finite() || z < 0.0 {
            return Err(Error::InvalidArgument(alloc::format!("squared distance must be finite and >= 0, got {z}")));
        }
        Ok(self.psi_unchecked(z, j))
    }

    fn psi_unchecked(&self, z: f64, j: usize) -> f64 {
        let inv_l2 = 1.0 / (self.lambda * self.lambda);
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        match self.family {
            KernelFamily::RationalQuadratic => {
                let s = 1.0 + z * inv_l2;
                let fact = [1.0, 1.0, 2.0, 6.0, 24.0][j];
                sign * libm::pow(inv_l2, j as f64) * fact * libm::pow(s, -(j as f64) - 1.0)
            }
            KernelFamily::Gaussian => sign * libm::pow(inv_l2, j as f64) * libm::exp(-z * inv_l2),
            KernelFamily::Matern => {
                if j == 0 && z == 0.0 {
                    1.0
                } else {
                    self.matern_derivative(z, j)
                }
            }
        }
    }

    /// `(Ψ′, Ψ″, zΨ‴, z²Ψ⁗)` at `z`.
    fn radial_terms(&self, z: f64) -> RadialTerms {
        match self.family {
            KernelFamily::RationalQuadratic => {
                let inv_l2 = 1.0 / (self.lambda * self.lambda);
                let r = 1.0 / (1.0 + z * inv_l2);
                let w = inv_l2 * r;
                let zw = z * w;
                RadialTerms {
                    d1: -w * r,
                    d2: 2.0 * w * w * r,
                    z_d3: -6.0 * zw * w * w * r,
                    z2_d4: 24.0 * zw * zw * w * w * r,
                }
            }
            KernelFamily::Gaussian => {
                let inv_l2 = 1.0 / (self.lambda * self.lambda);
                let e = libm::exp(-z * inv_l2);
                let zi = z * inv_l2;
                RadialTerms {
                    d1: -inv_l2 * e,
                    d2: inv_l2 * inv_l2 * e,
                    z_d3: -zi * inv_l2 * inv_l2 * e,
                    z2_d4: zi * zi * inv_l2 * inv_l2 * e,
                }
            }
            KernelFamily::Matern => {
                let (b, c) = (self.matern_b, self.matern_c);
                let c2 = c * c;
                let t = c * libm::sqrt(z);
                let d1 = -b * c2 * 0.5 * self.matern_scaled(self.nu - 1.0, t);
                let d2 = b * c2 * c2 * 0.25 * self.matern_scaled(self.nu - 2.0, t);
                let (z_d3, z2_d4) = if z < MATERN_Z_FLOOR {
                    (0.0, 0.0)
                } else {
                    let nu = self.nu;
                    // zΨ‴ = −(b c⁴/8) t^{ν−1} K_{ν−3}(t),  z²Ψ⁗ = (b c⁴/16) t^ν K_{ν−4}(t)
                    let k3 = bessel_k(nu - 3.0, t);
                    let k4 = bessel_k(nu - 4.0, t);
                    (
                        -b * c2 * c2 / 8.0 * libm::pow(t, nu - 1.0) * k3,
                        b * c2 * c2 / 16.0 * libm::pow(t, nu) * k4,
                    )
                };
                RadialTerms { d1, d2, z_d3, z2_d4 }
            }
        }
    }

    /// Base kernel `k(x, y)`.
    pub fn base(&self, x: &[f64], y: &[f64]) -> f64 {
        self.psi_unchecked(squared_distance(x, y), 0)
    }

    /// Stein kernel `k₀(x, y)` given the scores `ux = ∇log p(x)`, `uy = ∇log p(y)`.
    pub fn stein(&self, x: &[f64], y: &[f64], ux: &[f64], uy: &[f64]) -> Result<f64> {
        let d = x.len();
        if y.len() != d || ux.len() != d || uy.len() != d {
            return Err(Error::Dimension(alloc::format!(
                "stein kernel arguments have lengths {}, {}, {}, {}",
                x.len(),
                y.len(),
                ux.len(),
                uy.len()
            )));
        }
        if x.iter().chain(y).chain(ux).chain(uy).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("stein kernel arguments"));
        }
        Ok(self.stein_unchecked(x, y, ux, uy))
    }

    pub(crate) fn stein_unchecked(&self, x: &[f64], y: &[f64], ux: &[f64], uy: &[f64]) -> f64 {
        let d = x.len() as f64;
        let (mut z, mut ux_r, mut uy_r, mut du_r, mut ux_uy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..x.len() {
            let r = x[i] - y[i];
            z += r * r;
            ux_r += ux[i] * r;
            uy_r += uy[i] * r;
            du_r += (ux[i] - uy[i]) * r;
            ux_uy += ux[i] * uy[i];
        }
        let t = self.radial_terms(z);
        16.0 * t.z2_d4 + 16.0 * (2.0 + d) * t.z_d3 + 4.0 * (2.0 + d) * d * t.d2
            + 4.0 * (2.0 * t.z_d3 + (2.0 + d) * t.d2) * du_r
            - 4.0 * t.d2 * ux_r * uy_r
            - 2.0 * t.d1 * ux_uy
    }

    /// `k₀` between rows of two sample sets (no regularization).
    pub fn cross_matrix(&self, a: &SampleSet, b: &SampleSet) -> Matrix {
        Matrix::from_fn(a.len(), b.len(), |i, j| {
            self.stein_unchecked(a.point(i), b.point(j), a.gradient(i), b.gradient(j))
        })
    }

    /// `k₀` between rows `rows` and columns `cols` of one sample set.
    pub fn block(&self, samples: &SampleSet, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| {
            let (r, c) = (rows[i], cols[j]);
            self.stein_unchecked(samples.point(r), samples.point(c), samples.gradient(r), samples.gradient(c))
        })
    }

    /// Raw symmetric Gram matrix of `k₀` on the samples.
    pub fn gram(&self, samples: &SampleSet) -> Matrix {
        let n = samples.len();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.stein_unchecked(samples.point(i), samples.point(j), samples.gradient(i), samples.gradient(j));
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }
}

struct RadialTerms {
    d1: f64,
    d2: f64,
    z_d3: f64,
    z2_d4: f64,
}

#[inline]
pub fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Free-function form of [`KernelConfig::psi_derivative`].
pub fn psi_derivative(cfg: &KernelConfig, z: f64, j: usize) -> Result<f64> {
    cfg.psi_derivative(z, j)
}

/// Free-function form of [`KernelConfig::stein`].
pub fn stein_kernel_eval(cfg: &KernelConfig, x: &[f64], y: &[f64], ux: &[f64], uy: &[f64]) -> Result<f64> {
    cfg.stein(x, y, ux, uy)
}

/// The assembled `K₀` together with its Cholesky factor.
///
/// `values` already contains the jitter `ε·I` when one was needed.
#[derive(Debug, Clone)]
pub struct SteinKernelMatrix {
    values: Matrix,
    factor: Cholesky,
    jitter: f64,
}

impl SteinKernelMatrix {
    /// Factorizes a precomputed `K₀`, applying the jitter schedule.
    pub fn from_matrix(mut values: Matrix) -> Result<Self> {
        if values.rows() != values.cols() {
            return Err(Error::Dimension(alloc::format!(
                "kernel matrix is {}x{}",
                values.rows(),
                values.cols()
            )));
        }
        let reg = linalg::regularized_cholesky(&values)?;
        if reg.jitter > 0.0 {
            values.add_diagonal(reg.jitter);
        }
        Ok(SteinKernelMatrix { values, factor: reg.factor, jitter: reg.jitter })
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn regularization_applied(&self) -> bool {
        self.jitter > 0.0
    }

    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.factor.solve(b)
    }
}

/// `[K₀]ᵢⱼ = k₀(x⁽ⁱ⁾, x⁽ʲ⁾)` with the conditioning safeguards applied.
pub fn assemble_stein_matrix(cfg: &KernelConfig, samples: &SampleSet) -> Result<SteinKernelMatrix> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    SteinKernelMatrix::from_matrix(cfg.gram(samples))
}

/// Gram-type inner product used by the diagnostics: `vᵀ K v`.
pub fn quadratic_form(k: &Matrix, v: &[f64]) -> f64 {
    dot(v, &k.matvec(v))
}
