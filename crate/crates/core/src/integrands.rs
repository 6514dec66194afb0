//! Integrands used by the built-in experiments.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::targets::sigmoid;

/// `1 + x₂ + 0.1x₁x₂x₃ + sin(x₁)exp[−(x₂x₃)²]`, whose integral under
/// `N(0, I_d)` is exactly 1 for every `d ≥ 3`.
pub fn gaussian_test_integrand(x: &[f64]) -> f64 {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    let q = x2 * x3;
    1.0 + x2 + 0.1 * x1 * x2 * x3 + libm::sin(x1) * libm::exp(-q * q)
}

/// The true value of [`gaussian_test_integrand`] under `N(0, I_d)`.
pub const GAUSSIAN_TEST_VALUE: f64 = 1.0;

/// Predictive probability `σ(x̃ᵀβ)` for a fixed covariate row `x_tilde`.
pub fn predictive_probability(x_tilde: &[f64], beta: &[f64]) -> Result<f64> {
    if x_tilde.len() != beta.len() {
        return Err(Error::Dimension(alloc::format!(
            "covariate row has {} entries for {} coefficients",
            x_tilde.len(),
            beta.len()
        )));
    }
    Ok(sigmoid(dot(x_tilde, beta)))
}

/// Marginal posterior means on the probability scale: coordinate `i` of a
/// logit-space state mapped back through the logistic function.
pub fn logit_coordinate(x_tilde: &[f64], i: usize) -> f64 {
    sigmoid(x_tilde[i])
}

/// Evaluates `f` on every row of a row-major `n × d` buffer.
pub fn evaluate_rows(points: &crate::linalg::Matrix, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..points.rows()).map(|i| f(points.row(i))).collect()
}
