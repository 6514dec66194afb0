//! Nyström-approximated semi-exact control functionals.
//!
//! The kernel part of the interpolant is restricted to a random subset of
//! `n₀` points, `f ≈ K₀[:, S] ã + P b̃`, with `ã` penalized through
//! `P_Sᵀã ≈ 0`. The resulting `(n₀+m)`-dimensional normal equations are
//! solved by block-preconditioned conjugate gradient, or directly by QR.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::{EstimatorResult, Method, NystromInfo, RANK_TOLERANCE};
use crate::kernel::KernelConfig;
use crate::linalg::{self, dot, norm2, HouseholderQr, Matrix};
use crate::samples::SampleSet;

pub const DEFAULT_CG_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetSize {
    /// `⌈√n⌉`.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NystromSolver {
    ConjugateGradient,
    /// Householder least squares on the stacked system; same solution as the
    /// normal equations without squaring their condition number.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NystromConfig {
    pub n0: SubsetSize,
    pub cg_tolerance: f64,
    /// `None` means `10·(n₀+m)`.
    pub cg_max_iters: Option<usize>,
    pub seed: u64,
    pub solver: NystromSolver,
}

impl Default for NystromConfig {
    fn default() -> Self {
        NystromConfig {
            n0: SubsetSize::Auto,
            cg_tolerance: DEFAULT_CG_TOLERANCE,
            cg_max_iters: None,
            seed: 0,
            solver: NystromSolver::ConjugateGradient,
        }
    }
}

impl NystromConfig {
    pub fn resolve_n0(&self, n: usize) -> usize {
        match self.n0 {
            SubsetSize::Auto => {
                let mut r = libm::sqrt(n as f64) as usize;
                while r * r < n {
                    r += 1;
                }
                r
            }
            SubsetSize::Fixed(k) => k,
        }
    }
}

/// Sorted uniform subset of `n0` distinct indices out of `0..n`.
pub fn select_subset(n: usize, n0: usize, seed: u64) -> Result<Vec<usize>> {
    if n0 > n {
        return Err(Error::InvalidArgument(alloc::format!("subset size {n0} exceeds the {n} available points")));
    }
    if n0 == n {
        return Ok((0..n).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, n0).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Normal equations of the Nyström system.
///
/// `k_sn` is `K₀[S, :]` (`n₀ × n`), `p` the full Vandermonde matrix and
/// `p_s` its rows in `S`. Column order of `k_sn` must match the rows of `p`
/// and `fvals`; the products only sum over that shared index, so no explicit
/// permutation of the subset to the front is needed.
pub fn asecf_system(k_sn: &Matrix, p: &Matrix, p_s: &Matrix, fvals: &[f64]) -> Result<(Matrix, Vec<f64>)> {
    let (n0, n, m) = (k_sn.rows(), k_sn.cols(), p.cols());
    if p.rows() != n || fvals.len() != n || p_s.rows() != n0 || p_s.cols() != m {
        return Err(Error::Dimension(alloc::format!(
            "Nyström blocks: K {n0}x{n}, P {}x{m}, P_S {}x{}, f {}",
            p.rows(),
            p_s.rows(),
            p_s.cols(),
            fvals.len()
        )));
    }
    let kt = k_sn.transpose();
    let kk = kt.tr_matmul(&kt);
    let pp = p_s.matmul(&p_s.transpose());
    let kp = k_sn.matmul(p);
    let ptp = p.tr_matmul(p);
    let size = n0 + m;
    let lhs = Matrix::from_fn(size, size, |i, j| match (i < n0, j < n0) {
        (true, true) => kk[(i, j)] + pp[(i, j)],
        (true, false) => kp[(i, j - n0)],
        (false, true) => kp[(j, i - n0)],
        (false, false) => ptp[(i - n0, j - n0)],
    });
    let mut rhs = k_sn.matvec(fvals);
    rhs.extend(p.tr_matvec(fvals));
    Ok((lhs, rhs))
}

/// Lower-triangular `B` with `BBᵀ = A⁻¹`.
fn inverse_factor(a: &Matrix) -> Result<Matrix> {
    let inv = linalg::regularized_cholesky(a)?.factor.inverse();
    Ok(linalg::regularized_cholesky(&inv)?.factor.factor_matrix())
}

/// Block preconditioner: `B₁B₁ᵀ = ((n/n₀)K²_SS + P_SP_Sᵀ)⁻¹` and
/// `B₂B₂ᵀ = (PᵀP)⁻¹`, both lower triangular.
pub fn build_preconditioner(k_ss: &Matrix, p_s: &Matrix, ptp: &Matrix, n: usize) -> Result<(Matrix, Matrix)> {
    let n0 = k_ss.rows();
    let scale = n as f64 / n0 as f64;
    let k2 = k_ss.matmul(k_ss);
    let pp = p_s.matmul(&p_s.transpose());
    let m1 = Matrix::from_fn(n0, n0, |i, j| scale * 0.5 * (k2[(i, j)] + k2[(j, i)]) + pp[(i, j)]);
    Ok((inverse_factor(&m1)?, inverse_factor(ptp)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖Ax − b‖ / ‖b‖` at exit.
    pub residual: f64,
    pub converged: bool,
}

/// Conjugate gradient for a symmetric positive semi-definite `a`, started at
/// `x0`. Hitting `max_iters` is reported rather than treated as an error.
pub fn cg_solve(a: &Matrix, b: &[f64], x0: &[f64], tol: f64, max_iters: usize) -> Result<CgOutcome> {
    let mut x = x0.to_vec();
    let ax = a.matvec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let bnorm = norm2(b);
    let denom = if bnorm > 0.0 { bnorm } else { 1.0 };
    let mut rr = dot(&r, &r);
    let mut p = r.clone();
    let mut iterations = 0;
    let mut residual = libm::sqrt(rr) / denom;
    while residual > tol && iterations < max_iters {
        let ap = a.matvec(&p);
        let pap = dot(&p, &ap);
        if pap.is_nan() {
            return Err(Error::CgBreakdown(iterations));
        }
        if pap <= 0.0 {
            // search direction in the null space: nothing more to gain
            break;
        }
        let alpha = rr / pap;
        linalg::axpy(alpha, &p, &mut x);
        linalg::axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        iterations += 1;
        if rr_new.is_nan() || x.iter().any(|v| v.is_nan()) {
            return Err(Error::CgBreakdown(iterations));
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        residual = libm::sqrt(rr) / denom;
    }
    Ok(CgOutcome { x, iterations, residual, converged: residual <= tol })
}

fn lower_matvec(l: &Matrix, x: &[f64]) -> Vec<f64> {
    (0..l.rows()).map(|i| dot(&l.row(i)[..=i], &x[..=i])).collect()
}

fn lower_tr_matvec(l: &Matrix, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; l.cols()];
    for (i, &xi) in x.iter().enumerate() {
        linalg::axpy(xi, &l.row(i)[..=i], &mut out[..=i]);
    }
    out
}

fn lower_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in 0..l.rows() {
        let s = dot(&l.row(i)[..i], &x[..i]);
        x[i] = (x[i] - s) / l[(i, i)];
    }
    x
}

/// `Bᵀ A B` for `B = diag(B₁, B₂)`, both lower triangular.
fn precondition(a: &Matrix, b1: &Matrix, b2: &Matrix) -> Matrix {
    let n0 = b1.rows();
    let size = a.rows();
    let block = Matrix::from_fn(size, size, |i, j| match (i < n0, j < n0) {
        (true, true) => b1[(i, j)],
        (false, false) => b2[(i - n0, j - n0)],
        _ => 0.0,
    });
    let ab = a.matmul(&block);
    let out = block.tr_matmul(&ab);
    Matrix::from_fn(size, size, |i, j| 0.5 * (out[(i, j)] + out[(j, i)]))
}

struct Solved {
    a: Vec<f64>,
    b: Vec<f64>,
    iterations: usize,
    residual: f64,
    converged: bool,
    weights: Option<Vec<f64>>,
}

fn solve_cg(k_sn: &Matrix, k_ss: &Matrix, p: &Matrix, p_s: &Matrix, fvals: &[f64], cfg: &NystromConfig) -> Result<Solved> {
    let (n0, n, m) = (k_sn.rows(), k_sn.cols(), p.cols());
    let (lhs, rhs) = asecf_system(k_sn, p, p_s, fvals)?;
    let ptp = p.tr_matmul(p);
    let (b1, b2) = build_preconditioner(k_ss, p_s, &ptp, n)?;
    let op = precondition(&lhs, &b1, &b2);
    let mut brhs = lower_tr_matvec(&b1, &rhs[..n0]);
    brhs.extend(lower_tr_matvec(&b2, &rhs[n0..]));
    // ã = 0 and b̃ = e₁·mean(f): the Monte Carlo starting point
    let mean = fvals.iter().sum::<f64>() / n as f64;
    let mut e1 = vec![0.0; m];
    e1[0] = mean;
    let mut x0 = vec![0.0; n0];
    x0.extend(lower_solve(&b2, &e1));
    let max_iters = cfg.cg_max_iters.unwrap_or(10 * (n0 + m));
    let out = cg_solve(&op, &brhs, &x0, cfg.cg_tolerance, max_iters)?;
    let a = lower_matvec(&b1, &out.x[..n0]);
    let b = lower_matvec(&b2, &out.x[n0..]);
    Ok(Solved { a, b, iterations: out.iterations, residual: out.residual, converged: out.converged, weights: None })
}

fn solve_direct(k_sn: &Matrix, p: &Matrix, p_s: &Matrix, fvals: &[f64]) -> Result<Solved> {
    let (n0, n, m) = (k_sn.rows(), k_sn.cols(), p.cols());
    if n + m < n0 + m {
        return Err(Error::Unisolvency { m });
    }
    let stacked = Matrix::from_fn(n + m, n0 + m, |i, j| match (i < n, j < n0) {
        (true, true) => k_sn[(j, i)],
        (true, false) => p[(i, j - n0)],
        (false, true) => p_s[(j, i - n)],
        (false, false) => 0.0,
    });
    let qr = HouseholderQr::new(&stacked);
    if !qr.is_full_rank(RANK_TOLERANCE) {
        return Err(Error::Unisolvency { m });
    }
    let mut rhs = fvals.to_vec();
    rhs.resize(n + m, 0.0);
    let x = qr.solve_least_squares(&rhs);
    let mut e = vec![0.0; n0 + m];
    e[n0] = 1.0;
    let mut w = qr.thin_q_times(&qr.solve_rt(&e));
    w.truncate(n);
    let mut stacked_x = stacked.matvec(&x);
    for (s, r) in stacked_x.iter_mut().zip(&rhs) {
        *s -= r;
    }
    let rnorm = norm2(&rhs);
    let residual = norm2(&stacked.tr_matvec(&stacked_x)) / if rnorm > 0.0 { rnorm } else { 1.0 };
    Ok(Solved {
        a: x[..n0].to_vec(),
        b: x[n0..].to_vec(),
        iterations: 0,
        residual,
        converged: true,
        weights: Some(w),
    })
}

/// Approximate SECF estimate `b̃₁`.
///
/// `coeff_a` holds the `n₀` subset coefficients, aligned with
/// `nystrom.subset` in original sample order. Weights are only available
/// from the direct solver.
pub fn asecf_estimate(
    kernel: &KernelConfig,
    samples: &SampleSet,
    p: &Matrix,
    fvals: &[f64],
    cfg: &NystromConfig,
) -> Result<EstimatorResult> {
    let n = samples.len();
    let m = p.cols();
    if fvals.len() != n || p.rows() != n {
        return Err(Error::Dimension(alloc::format!("{} values and {} Vandermonde rows for {n} points", fvals.len(), p.rows())));
    }
    if fvals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("integrand values"));
    }
    if !(cfg.cg_tolerance >= 0.0) {
        return Err(Error::InvalidArgument("conjugate gradient tolerance must be non-negative".into()));
    }
    let n0 = cfg.resolve_n0(n);
    if n0 < m || n0 > n {
        return Err(Error::InvalidArgument(alloc::format!("subset size must satisfy m <= n0 <= n, got m={m}, n0={n0}, n={n}")));
    }
    let subset = select_subset(n, n0, cfg.seed)?;
    let all: Vec<usize> = (0..n).collect();
    let k_sn = kernel.block(samples, &subset, &all);
    let p_s = p.select_rows(&subset);
    let solved = match cfg.solver {
        NystromSolver::ConjugateGradient => {
            let k_ss = k_sn.select_cols(&subset);
            solve_cg(&k_sn, &k_ss, p, &p_s, fvals, cfg)?
        }
        NystromSolver::Direct => solve_direct(&k_sn, p, &p_s, fvals)?,
    };
    let mut r = EstimatorResult::bare(Method::Asecf, solved.b[0]);
    r.weights = solved.weights;
    r.coeff_a = Some(solved.a);
    r.coeff_b = Some(solved.b);
    r.nystrom = Some(NystromInfo {
        n0,
        subset,
        iterations: solved.iterations,
        residual: solved.residual,
        converged: solved.converged,
    });
    Ok(r)
}
