//! Kernel Stein discrepancy of cubature weights and the computable error
//! bound proxy `(wᵀK₀w)^{1/2} (aᵀK₀a)^{1/2}`.

use crate::error::{Error, Result};
use crate::estimators::EstimatorResult;
use crate::kernel::quadratic_form;
use crate::linalg::{dot, Matrix};

/// Negative round-off tolerated in a quadratic form before it is reported as
/// a conditioning failure, relative to `max(1, ‖v‖² · max diag)`.
pub const NEGATIVE_FORM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticReport {
    /// Kernel Stein discrepancy `(wᵀK₀w)^{1/2}` of the weighted sample.
    pub ksd: f64,
    /// `(aᵀK₀a)^{1/2}`, a proxy for the semi-norm of the integrand; not a
    /// guaranteed bound on it.
    pub seminorm_proxy: f64,
    /// `ksd · seminorm_proxy`.
    pub bound_product: f64,
}

fn sqrt_form(k: &Matrix, v: &[f64]) -> Result<f64> {
    if v.len() != k.rows() {
        return Err(Error::Dimension(alloc::format!(
            "vector of length {} for a {}x{} kernel matrix",
            v.len(),
            k.rows(),
            k.cols()
        )));
    }
    let q = quadratic_form(k, v);
    if !q.is_finite() {
        return Err(Error::NonFinite("quadratic form"));
    }
    if q < 0.0 {
        let scale = (dot(v, v) * k.max_diagonal().abs()).max(1.0);
        if q < -NEGATIVE_FORM_TOLERANCE * scale {
            return Err(Error::NegativeQuadraticForm(q));
        }
        return Ok(0.0);
    }
    Ok(libm::sqrt(q))
}

/// `√(wᵀK₀w)`, clamped at zero for round-off.
pub fn ksd_of_weights(k0: &Matrix, w: &[f64]) -> Result<f64> {
    sqrt_form(k0, w)
}

pub(crate) fn report(k0: &Matrix, w: &[f64], a: &[f64]) -> Result<DiagnosticReport> {
    let ksd = sqrt_form(k0, w)?;
    let seminorm_proxy = sqrt_form(k0, a)?;
    Ok(DiagnosticReport { ksd, seminorm_proxy, bound_product: ksd * seminorm_proxy })
}

/// Diagnostic report for a kernel-based result carrying weights and `a`.
pub fn error_bound(result: &EstimatorResult, k0: &Matrix) -> Result<DiagnosticReport> {
    match (&result.weights, &result.coeff_a) {
        (Some(w), Some(a)) => report(k0, w, a),
        _ => Err(Error::Unsupported("error bound needs cubature weights and kernel coefficients")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::mc_estimate;
    use alloc::vec;

    #[test]
    fn ksd_of_simple_weights() {
        let k = Matrix::from_row_major(2, 2, vec![4.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!(ksd_of_weights(&k, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(ksd_of_weights(&k, &[1.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn tiny_negative_forms_are_clamped() {
        let k = Matrix::from_row_major(1, 1, vec![-1e-14]).unwrap();
        assert_eq!(ksd_of_weights(&k, &[1.0]).unwrap(), 0.0);
        let bad = Matrix::from_row_major(1, 1, vec![-1e-3]).unwrap();
        assert!(matches!(ksd_of_weights(&bad, &[1.0]), Err(Error::NegativeQuadraticForm(_))));
    }

    #[test]
    fn mc_results_are_unsupported() {
        let r = mc_estimate(&[1.0, 2.0]).unwrap();
        assert!(matches!(error_bound(&r, &Matrix::identity(2)), Err(Error::Unsupported(_))));
    }
}
