//! Lengthscale selection: the median heuristic and k-fold cross-validation.

use alloc::string::ToString;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis::{vandermonde, PolynomialBasis};
use crate::error::{Error, Result};
use crate::estimators::SecfSystem;
use crate::kernel::{squared_distance, KernelConfig, SteinKernelMatrix};
use crate::linalg::{dot, Matrix};
use crate::samples::{distinct_rows, SampleSet};

pub const DEFAULT_FOLDS: usize = 5;

/// `10^{−1.5}, 10^{−1}, …, 10^{1}`.
pub fn default_grid() -> Vec<f64> {
    [-1.5, -1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|&e| libm::pow(10.0, e)).collect()
}

/// `√(½ · median ‖xᵢ − xⱼ‖²)` over all pairs `i < j`.
pub fn median_heuristic(points: &Matrix) -> Result<f64> {
    let n = points.rows();
    if n < 2 {
        return Err(Error::InvalidArgument("the median heuristic needs at least two points".into()));
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            dists.push(squared_distance(points.row(i), points.row(j)));
        }
    }
    if dists.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("points"));
    }
    let len = dists.len();
    let mid = len / 2;
    let (_, &mut upper, _) = dists.select_nth_unstable_by(mid, f64::total_cmp);
    let median = if len % 2 == 1 {
        upper
    } else {
        let lower = dists[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    };
    if !(median > 0.0) {
        return Err(Error::InvalidData("all points coincide; the median distance is zero".into()));
    }
    Ok(libm::sqrt(0.5 * median))
}

/// Fold label for each of `n` points: a seeded shuffle cut into `folds`
/// contiguous blocks, the first `n mod folds` blocks one element longer.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut labels = alloc::vec![0; n];
    let mut pos = 0;
    for fold in 0..folds {
        let size = base + usize::from(fold < extra);
        for &i in &order[pos..pos + size] {
            labels[i] = fold;
        }
        pos += size;
    }
    labels
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub lambda: f64,
    /// Total held-out squared error per grid value, or the failure message.
    pub scores: Vec<(f64, core::result::Result<f64, alloc::string::String>)>,
}

/// Cross-validation error of the semi-exact interpolant for one `λ`, using
/// the precomputed Gram matrix and Vandermonde matrix of the full sample.
fn cv_error(gram: &Matrix, p: &Matrix, fvals: &[f64], labels: &[usize], folds: usize) -> Result<f64> {
    let n = fvals.len();
    let mut total = 0.0;
    for fold in 0..folds {
        let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| labels[i] == fold);
        debug_assert!(test.iter().all(|i| !train.contains(i)));
        let k_train = SteinKernelMatrix::from_matrix(gram.select_rows(&train).select_cols(&train))?;
        let p_train = p.select_rows(&train);
        let f_train: Vec<f64> = train.iter().map(|&i| fvals[i]).collect();
        let sol = SecfSystem::new(&k_train, &p_train)?.solve(&f_train)?;
        for &t in &test {
            let k_row: Vec<f64> = train.iter().map(|&j| gram[(t, j)]).collect();
            let pred = dot(&k_row, &sol.a) + dot(p.row(t), &sol.b);
            let e = fvals[t] - pred;
            total += e * e;
        }
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("cross-validation error"));
    }
    Ok(total)
}

/// Grid search for `λ` minimizing the `folds`-fold held-out squared error
/// of the semi-exact interpolant with the caller's basis.
///
/// Points are deduplicated before folds are drawn. Totals within a relative
/// `1e-10` of the best (scaled by `Σf²`) count as ties, and ties go to the
/// smallest `λ`, so the result does not depend on grid order.
pub fn cv_select_lambda(
    kernel: &KernelConfig,
    samples: &SampleSet,
    fvals: &[f64],
    basis: &PolynomialBasis,
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<CvOutcome> {
    if grid.is_empty() {
        return Err(Error::Empty("lambda grid"));
    }
    if fvals.len() != samples.len() {
        return Err(Error::Dimension(alloc::format!("{} values for {} points", fvals.len(), samples.len())));
    }
    if folds < 2 {
        return Err(Error::InvalidArgument("cross-validation needs at least two folds".into()));
    }
    let keep = distinct_rows(samples.points());
    let samples = samples.select(&keep);
    let fvals: Vec<f64> = keep.iter().map(|&i| fvals[i]).collect();
    let n = fvals.len();
    let m = basis.m();
    if n < folds * (m + 1) {
        return Err(Error::InvalidArgument(alloc::format!(
            "{n} distinct points are too few for {folds}-fold cross-validation with m = {m}"
        )));
    }
    let p = vandermonde(basis, &samples)?;
    let labels = fold_assignment(n, folds, seed);
    let mut scores = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let score = kernel
            .with_lambda(lambda)
            .and_then(|k| cv_error(&k.gram(&samples), &p, &fvals, &labels, folds))
            .map_err(|e| e.to_string());
        scores.push((lambda, score));
    }
    let best = scores.iter().filter_map(|(_, s)| s.as_ref().ok()).copied().fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        let failures = scores.into_iter().map(|(l, s)| (l, s.err().unwrap_or_default())).collect();
        return Err(Error::Tuning(failures));
    }
    let tol = 1e-10 * fvals.iter().map(|f| f * f).sum::<f64>();
    let lambda = scores
        .iter()
        .filter(|(_, s)| matches!(s, Ok(v) if *v <= best + tol))
        .map(|(l, _)| *l)
        .fold(f64::INFINITY, f64::min);
    Ok(CvOutcome { lambda, scores })
}
