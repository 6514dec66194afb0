//! Direct estimators of `∫ f p`: Monte Carlo, zero-variance polynomial
//! control variates, control functionals and semi-exact control functionals.

use alloc::vec;
use alloc::vec::Vec;

use crate::diagnostics::{self, DiagnosticReport};
use crate::error::{Error, Result};
use crate::kernel::SteinKernelMatrix;
use crate::linalg::{self, dot, HouseholderQr, Matrix};

/// Relative threshold on `|Rⱼⱼ|` below which the (whitened) Vandermonde
/// matrix is declared rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Mc,
    Zv,
    Cf,
    Secf,
    Asecf,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Zv => "zv",
            Method::Cf => "cf",
            Method::Secf => "secf",
            Method::Asecf => "asecf",
        }
    }

    /// Whether the method builds a Stein kernel matrix.
    pub fn uses_kernel(self) -> bool {
        matches!(self, Method::Cf | Method::Secf | Method::Asecf)
    }

    /// Whether the method uses a polynomial basis.
    pub fn uses_basis(self) -> bool {
        matches!(self, Method::Zv | Method::Secf | Method::Asecf)
    }
}

impl core::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mc" => Ok(Method::Mc),
            "zv" => Ok(Method::Zv),
            "cf" => Ok(Method::Cf),
            "secf" => Ok(Method::Secf),
            "asecf" => Ok(Method::Asecf),
            other => Err(Error::InvalidArgument(alloc::format!("unknown method {other:?}"))),
        }
    }
}

/// Nyström bookkeeping attached to approximate results.
#[derive(Debug, Clone, PartialEq)]
pub struct NystromInfo {
    pub n0: usize,
    /// Selected subset, ascending, in original sample indices.
    pub subset: Vec<usize>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorResult {
    pub method: Method,
    pub estimate: f64,
    pub weights: Option<Vec<f64>>,
    /// Kernel coefficients `a`, one per sample.
    pub coeff_a: Option<Vec<f64>>,
    /// Polynomial coefficients `b`; `b₁` is the constant term.
    pub coeff_b: Option<Vec<f64>>,
    pub diagnostics: Option<DiagnosticReport>,
    pub nystrom: Option<NystromInfo>,
    /// Seconds; the core never measures time, so this stays 0 until a caller
    /// fills it in.
    pub wall_time: f64,
}

impl EstimatorResult {
    pub(crate) fn bare(method: Method, estimate: f64) -> Self {
        EstimatorResult {
            method,
            estimate,
            weights: None,
            coeff_a: None,
            coeff_b: None,
            diagnostics: None,
            nystrom: None,
            wall_time: 0.0,
        }
    }
}

fn check_values(fvals: &[f64]) -> Result<()> {
    if fvals.is_empty() {
        return Err(Error::Empty("integrand values"));
    }
    if fvals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("integrand values"));
    }
    Ok(())
}

/// Sample-path average.
pub fn mc_estimate(fvals: &[f64]) -> Result<EstimatorResult> {
    check_values(fvals)?;
    let n = fvals.len() as f64;
    let mean = fvals.iter().sum::<f64>() / n;
    let mut r = EstimatorResult::bare(Method::Mc, mean);
    r.weights = Some(vec![1.0 / n; fvals.len()]);
    Ok(r)
}

/// Ordinary least squares on the Stein-mapped polynomial columns; the
/// estimate is the intercept.
pub fn zv_estimate(p: &Matrix, fvals: &[f64]) -> Result<EstimatorResult> {
    check_values(fvals)?;
    if p.rows() != fvals.len() {
        return Err(Error::Dimension(alloc::format!(
            "Vandermonde matrix has {} rows for {} values",
            p.rows(),
            fvals.len()
        )));
    }
    let m = p.cols();
    if p.rows() < m {
        return Err(Error::Unisolvency { m });
    }
    let qr = HouseholderQr::new(p);
    if !qr.is_full_rank(RANK_TOLERANCE) {
        return Err(Error::Unisolvency { m });
    }
    let b = qr.solve_least_squares(fvals);
    let mut e1 = vec![0.0; m];
    e1[0] = 1.0;
    let weights = qr.thin_q_times(&qr.solve_rt(&e1));
    let mut r = EstimatorResult::bare(Method::Zv, b[0]);
    r.weights = Some(weights);
    r.coeff_b = Some(b);
    Ok(r)
}

/// `(1ᵀK₀⁻¹1)⁻¹ 1ᵀK₀⁻¹f`.
pub fn cf_estimate(k0: &SteinKernelMatrix, fvals: &[f64]) -> Result<EstimatorResult> {
    check_values(fvals)?;
    let n = k0.len();
    if fvals.len() != n {
        return Err(Error::Dimension(alloc::format!("{} values for a {n}x{n} kernel matrix", fvals.len())));
    }
    let v = k0.solve(&vec![1.0; n]);
    let total: f64 = v.iter().sum();
    if !(total.is_finite()) || total == 0.0 {
        return Err(Error::Conditioning { jitter: k0.jitter() });
    }
    let weights: Vec<f64> = v.iter().map(|x| x / total).collect();
    let estimate = dot(&weights, fvals);
    let resid: Vec<f64> = fvals.iter().map(|f| f - estimate).collect();
    let a = k0.solve(&resid);
    let mut r = EstimatorResult::bare(Method::Cf, estimate);
    r.diagnostics = Some(diagnostics::report(k0.values(), &weights, &a)?);
    r.weights = Some(weights);
    r.coeff_a = Some(a);
    r.coeff_b = Some(vec![estimate]);
    Ok(r)
}

/// Solution `(a, b)` of `K₀a + Pb = f`, `Pᵀa = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecfSolution {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// The block system for one `(K₀, P)` pair, factored once and reusable
/// across integrands.
///
/// With `K₀ = LLᵀ` and `Q = L⁻¹P = Q̂R`, the Schur-complement solution is
/// `b = R⁻¹Q̂ᵀL⁻¹f` and `a = L⁻ᵀ(L⁻¹f − Qb)`, which is the least-squares
/// form of `b = (PᵀK₀⁻¹P)⁻¹PᵀK₀⁻¹f` without squaring the condition number.
#[derive(Debug, Clone)]
pub struct SecfSystem<'a> {
    k0: &'a SteinKernelMatrix,
    whitened: Matrix,
    qr: HouseholderQr,
}

impl<'a> SecfSystem<'a> {
    pub fn new(k0: &'a SteinKernelMatrix, p: &Matrix) -> Result<Self> {
        let (n, m) = (p.rows(), p.cols());
        if n != k0.len() {
            return Err(Error::Dimension(alloc::format!(
                "Vandermonde matrix has {n} rows but the kernel matrix is {}x{}",
                k0.len(),
                k0.len()
            )));
        }
        if m == 0 {
            return Err(Error::Dimension("Vandermonde matrix has no columns".into()));
        }
        if n < m {
            return Err(Error::Unisolvency { m });
        }
        let whitened = k0.factor().forward_matrix(p);
        let qr = HouseholderQr::new(&whitened);
        if !qr.is_full_rank(RANK_TOLERANCE) {
            return Err(Error::Unisolvency { m });
        }
        Ok(SecfSystem { k0, whitened, qr })
    }

    pub fn kernel(&self) -> &SteinKernelMatrix {
        self.k0
    }

    pub fn solve(&self, fvals: &[f64]) -> Result<SecfSolution> {
        check_values(fvals)?;
        if fvals.len() != self.k0.len() {
            return Err(Error::Dimension(alloc::format!(
                "{} values for {} points",
                fvals.len(),
                self.k0.len()
            )));
        }
        let factor = self.k0.factor();
        let mut g = fvals.to_vec();
        factor.forward_in_place(&mut g);
        let b = self.qr.solve_least_squares(&g);
        let qb = self.whitened.matvec(&b);
        let mut a: Vec<f64> = g.iter().zip(&qb).map(|(x, y)| x - y).collect();
        factor.backward_in_place(&mut a);
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::Conditioning { jitter: self.k0.jitter() });
        }
        Ok(SecfSolution { a, b })
    }

    /// Cubature weights `w = K₀⁻¹P(PᵀK₀⁻¹P)⁻¹e₁`.
    pub fn weights(&self) -> Vec<f64> {
        let m = self.whitened.cols();
        let mut e1 = vec![0.0; m];
        e1[0] = 1.0;
        let mut w = self.qr.thin_q_times(&self.qr.solve_rt(&e1));
        self.k0.factor().backward_in_place(&mut w);
        w
    }
}

/// Interpolant coefficients for the block system.
pub fn secf_solve(k0: &SteinKernelMatrix, p: &Matrix, fvals: &[f64]) -> Result<SecfSolution> {
    SecfSystem::new(k0, p)?.solve(fvals)
}

/// Solves the full `(n+m)` indefinite block system by pivoted LU. Slower and
/// less stable than [`secf_solve`]; kept as an independent cross-check.
pub fn secf_solve_indefinite(k0: &SteinKernelMatrix, p: &Matrix, fvals: &[f64]) -> Result<SecfSolution> {
    check_values(fvals)?;
    let (n, m) = (p.rows(), p.cols());
    if n != k0.len() || fvals.len() != n {
        return Err(Error::Dimension(alloc::format!(
            "block system with kernel {}x{}, P {n}x{m}, f {}",
            k0.len(),
            k0.len(),
            fvals.len()
        )));
    }
    let k = k0.values();
    let big = Matrix::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
        (true, true) => k[(i, j)],
        (true, false) => p[(i, j - n)],
        (false, true) => p[(j, i - n)],
        (false, false) => 0.0,
    });
    let mut rhs = fvals.to_vec();
    rhs.resize(n + m, 0.0);
    let x = linalg::lu_solve(&big, &rhs).map_err(|_| Error::Unisolvency { m })?;
    Ok(SecfSolution { a: x[..n].to_vec(), b: x[n..].to_vec() })
}

/// Semi-exact control functional estimate `b₁`, with weights and diagnostics.
pub fn secf_estimate(k0: &SteinKernelMatrix, p: &Matrix, fvals: &[f64]) -> Result<EstimatorResult> {
    let system = SecfSystem::new(k0, p)?;
    let sol = system.solve(fvals)?;
    let weights = system.weights();
    let mut r = EstimatorResult::bare(Method::Secf, sol.b[0]);
    r.diagnostics = Some(diagnostics::report(k0.values(), &weights, &sol.a)?);
    r.weights = Some(weights);
    r.coeff_a = Some(sol.a);
    r.coeff_b = Some(sol.b);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate_basis, vandermonde};
    use crate::kernel::{assemble_stein_matrix, KernelConfig};
    use crate::samples::SampleSet;

    fn gaussian_points(n: usize, d: usize, seed: u64) -> SampleSet {
        crate::samplers::iid_standard_normal(d, n, seed).unwrap()
    }

    #[test]
    fn mc_examples() {
        assert_eq!(mc_estimate(&[1.0, 2.0, 3.0]).unwrap().estimate, 2.0);
        assert_eq!(mc_estimate(&[7.5]).unwrap().estimate, 7.5);
        assert_eq!(mc_estimate(&[0.25; 9]).unwrap().estimate, 0.25);
        assert!(matches!(mc_estimate(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn zv_recovers_constant_and_linear() {
        let s = gaussian_points(12, 1, 3);
        let p = vandermonde(&enumerate_basis(1, 1).unwrap(), &s).unwrap();
        assert!((zv_estimate(&p, &[4.0; 12]).unwrap().estimate - 4.0).abs() < 1e-12);
        let x: Vec<f64> = (0..12).map(|i| s.point(i)[0]).collect();
        assert!(zv_estimate(&p, &x).unwrap().estimate.abs() < 1e-10);
    }

    #[test]
    fn zv_rejects_rank_deficiency() {
        let pts = Matrix::from_row_major(3, 1, vec![1.0, 1.0, 1.0]).unwrap();
        let s = SampleSet::new(pts.clone(), pts, vec![]).unwrap();
        let p = vandermonde(&enumerate_basis(1, 1).unwrap(), &s).unwrap();
        assert!(matches!(zv_estimate(&p, &[1.0, 2.0, 3.0]), Err(Error::Unisolvency { m: 2 })));
    }

    #[test]
    fn cf_constant_and_single_point() {
        let s = gaussian_points(15, 2, 5);
        let k = KernelConfig::rational_quadratic(1.0).unwrap();
        let k0 = assemble_stein_matrix(&k, &s).unwrap();
        let r = cf_estimate(&k0, &[2.5; 15]).unwrap();
        assert!((r.estimate - 2.5).abs() < 1e-10);
        let w: f64 = r.weights.unwrap().iter().sum();
        assert!((w - 1.0).abs() < 1e-10);
        let one = assemble_stein_matrix(&k, &s.select(&[0])).unwrap();
        assert!((cf_estimate(&one, &[3.25]).unwrap().estimate - 3.25).abs() < 1e-14);
    }

    #[test]
    fn secf_recovers_exact_data() {
        let s = gaussian_points(25, 2, 11);
        let k0 = assemble_stein_matrix(&KernelConfig::rational_quadratic(1.2).unwrap(), &s).unwrap();
        let p = vandermonde(&enumerate_basis(2, 2).unwrap(), &s).unwrap();
        let b_true = [0.7, -1.0, 0.3, 2.0, 0.5, -0.25];
        let f = p.matvec(&b_true);
        let sol = secf_solve(&k0, &p, &f).unwrap();
        for (u, v) in sol.b.iter().zip(&b_true) {
            assert!((u - v).abs() < 1e-8);
        }
        assert!(linalg::norm_inf(&sol.a) < 1e-8);
    }

    #[test]
    fn secf_residuals_and_weights() {
        let s = gaussian_points(30, 3, 17);
        let k0 = assemble_stein_matrix(&KernelConfig::gaussian(1.5).unwrap(), &s).unwrap();
        let p = vandermonde(&enumerate_basis(3, 1).unwrap(), &s).unwrap();
        let f: Vec<f64> = (0..30).map(|i| libm::sin(s.point(i)[0]) + s.point(i)[1] * s.point(i)[2]).collect();
        let sol = secf_solve(&k0, &p, &f).unwrap();
        let fnorm = linalg::norm2(&f);
        let ka = k0.values().matvec(&sol.a);
        let pb = p.matvec(&sol.b);
        for i in 0..30 {
            assert!((ka[i] + pb[i] - f[i]).abs() <= 1e-8 * fnorm);
        }
        assert!(linalg::norm_inf(&p.tr_matvec(&sol.a)) <= 1e-8 * fnorm);
        let r = secf_estimate(&k0, &p, &f).unwrap();
        let w = r.weights.as_ref().unwrap();
        assert!((dot(w, &f) - r.estimate).abs() < 1e-8);
        let ptw = p.tr_matvec(w);
        assert!((ptw[0] - 1.0).abs() < 1e-8);
        assert!(ptw[1..].iter().all(|v| v.abs() < 1e-8));
        let lu = secf_solve_indefinite(&k0, &p, &f).unwrap();
        for (u, v) in lu.b.iter().zip(&sol.b) {
            assert!((u - v).abs() < 1e-7 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn secf_rejects_too_few_points() {
        let s = gaussian_points(4, 2, 1);
        let k0 = assemble_stein_matrix(&KernelConfig::rational_quadratic(1.0).unwrap(), &s).unwrap();
        let p = vandermonde(&enumerate_basis(2, 2).unwrap(), &s).unwrap();
        assert!(matches!(secf_estimate(&k0, &p, &[1.0; 4]), Err(Error::Unisolvency { m: 6 })));
    }
}
