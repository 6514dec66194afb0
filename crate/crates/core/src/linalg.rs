//! Dense row-major matrices and the handful of factorizations the estimators
//! need: Cholesky with a jitter schedule, Householder QR for small
//! least-squares blocks, and partially pivoted LU for indefinite systems.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(alloc::format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Rows selected by `idx`, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix { rows: idx.len(), cols: self.cols, data }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            axpy(xi, self.row(i), &mut out);
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let (a_row, out_row) = (self.row(i), &mut out.data[i * other.cols..(i + 1) * other.cols]);
            for (k, &aik) in a_row.iter().enumerate() {
                if aik != 0.0 {
                    axpy(aik, other.row(k), out_row);
                }
            }
        }
        out
    }

    /// `selfᵀ other` without forming the transpose.
    pub fn tr_matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "tr_matmul shape mismatch");
        let mut out = Matrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let (a_row, b_row) = (self.row(k), other.row(k));
            for (i, &aki) in a_row.iter().enumerate() {
                if aki != 0.0 {
                    axpy(aki, b_row, &mut out.data[i * other.cols..(i + 1) * other.cols]);
                }
            }
        }
        out
    }

    pub fn add_diagonal(&mut self, eps: f64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += eps;
        }
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// `xᵀ self x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.matvec(x))
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0_f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..n {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    libm::sqrt(dot(x, x))
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Lower-triangular Cholesky factor `A = L Lᵀ`, stored row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factorizes the lower triangle of `a`. Returns `None` at the first
    /// non-positive (or non-finite) pivot.
    pub fn factor(a: &Matrix) -> Option<Cholesky> {
        assert_eq!(a.rows(), a.cols(), "Cholesky needs a square matrix");
        let n = a.rows();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s = dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
                let v = a[(i, j)] - s;
                if i == j {
                    if !(v > 0.0) || !v.is_finite() {
                        return None;
                    }
                    l[i * n + i] = libm::sqrt(v);
                } else {
                    l[i * n + j] = v / l[j * n + j];
                }
            }
        }
        Some(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor_matrix(&self) -> Matrix {
        Matrix { rows: self.n, cols: self.n, data: self.l.clone() }
    }

    #[inline]
    fn l_row(&self, i: usize) -> &[f64] {
        &self.l[i * self.n..(i + 1) * self.n]
    }

    /// Smallest and largest diagonal entries of the factor.
    pub fn pivot_range(&self) -> (f64, f64) {
        (0..self.n).map(|i| self.l[i * self.n + i]).fold((f64::INFINITY, 0.0), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
    }

    /// Cheap condition-number proxy `(max Lᵢᵢ / min Lᵢᵢ)²`.
    pub fn condition_proxy(&self) -> f64 {
        let (lo, hi) = self.pivot_range();
        let r = hi / lo;
        r * r
    }

    /// Solves `L y = b` in place.
    pub fn forward_in_place(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let row = self.l_row(i);
            let s = dot(&row[..i], &b[..i]);
            b[i] = (b[i] - s) / row[i];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn backward_in_place(&self, y: &mut [f64]) {
        for i in (0..self.n).rev() {
            let row = self.l_row(i);
            y[i] /= row[i];
            let xi = y[i];
            for (yk, lik) in y[..i].iter_mut().zip(&row[..i]) {
                *yk -= lik * xi;
            }
        }
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        self.forward_in_place(b);
        self.backward_in_place(b);
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// `L⁻¹ B` for every column of `b`.
    pub fn forward_matrix(&self, b: &Matrix) -> Matrix {
        assert_eq!(b.rows(), self.n);
        let cols = b.cols();
        let mut out = b.clone();
        for i in 0..self.n {
            let row = self.l_row(i);
            let (done, rest) = out.data.split_at_mut(i * cols);
            let target = &mut rest[..cols];
            for (k, &lik) in row[..i].iter().enumerate() {
                if lik != 0.0 {
                    axpy(-lik, &done[k * cols..(k + 1) * cols], target);
                }
            }
            let inv = 1.0 / row[i];
            for v in target.iter_mut() {
                *v *= inv;
            }
        }
        out
    }

    /// `A⁻¹` formed column by column.
    pub fn inverse(&self) -> Matrix {
        let mut inv = Matrix::zeros(self.n, self.n);
        let mut e = vec![0.0; self.n];
        for j in 0..self.n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.solve_in_place(&mut e);
            for i in 0..self.n {
                inv[(i, j)] = e[i];
            }
        }
        // symmetrize round-off
        for i in 0..self.n {
            for j in 0..i {
                let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = v;
                inv[(j, i)] = v;
            }
        }
        inv
    }

    /// `L Lᵀ`, useful for reconstruction checks.
    pub fn reconstruct(&self) -> Matrix {
        let l = self.factor_matrix();
        l.matmul(&l.transpose())
    }
}

/// Outcome of [`regularized_cholesky`].
#[derive(Debug, Clone)]
pub struct Regularized {
    pub factor: Cholesky,
    /// Diagonal shift actually added (0 when none was needed).
    pub jitter: f64,
}

/// Largest acceptable condition-number proxy before jitter is added:
/// `1 / (100 · machine epsilon)`.
pub const CONDITION_LIMIT: f64 = 1.0 / (100.0 * f64::EPSILON);
/// First jitter, relative to the largest diagonal entry.
pub const JITTER_START: f64 = 1e-10;
pub const JITTER_GROWTH: f64 = 10.0;
pub const JITTER_RETRIES: usize = 5;

/// Cholesky factorization with an escalating diagonal jitter.
///
/// The plain factorization is accepted when it exists and its condition
/// proxy stays below [`CONDITION_LIMIT`]. Otherwise `ε·I` is added with
/// `ε = 1e-10 · max diag`, growing ×10 per retry for at most five retries,
/// until a factorization succeeds. The returned jitter is the shift used.
pub fn regularized_cholesky(a: &Matrix) -> Result<Regularized> {
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix entries"));
    }
    if let Some(factor) = Cholesky::factor(a) {
        if factor.condition_proxy() <= CONDITION_LIMIT {
            return Ok(Regularized { factor, jitter: 0.0 });
        }
    }
    let scale = a.max_diagonal().abs().max(f64::MIN_POSITIVE);
    let mut eps = JITTER_START * scale;
    let mut shifted = a.clone();
    let mut applied = 0.0;
    for _ in 0..JITTER_RETRIES {
        shifted.add_diagonal(eps - applied);
        applied = eps;
        if let Some(factor) = Cholesky::factor(&shifted) {
            return Ok(Regularized { factor, jitter: eps });
        }
        eps *= JITTER_GROWTH;
    }
    Err(Error::Conditioning { jitter: applied })
}

/// Householder QR of a tall `n × m` matrix, kept in compact form.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    n: usize,
    m: usize,
    /// Column-major storage: reflector vectors below the diagonal, `R` above.
    cols: Vec<Vec<f64>>,
    rdiag: Vec<f64>,
}

impl HouseholderQr {
    pub fn new(a: &Matrix) -> HouseholderQr {
        let (n, m) = (a.rows(), a.cols());
        assert!(n >= m, "QR needs at least as many rows as columns");
        let mut cols: Vec<Vec<f64>> = (0..m).map(|j| a.column(j)).collect();
        let mut rdiag = vec![0.0; m];
        for k in 0..m {
            let norm = norm2(&cols[k][k..]);
            if norm == 0.0 {
                rdiag[k] = 0.0;
                continue;
            }
            let alpha = if cols[k][k] > 0.0 { -norm } else { norm };
            // v = x - alpha e1, normalized so that v[0] = 1 is not required;
            // store v scaled by 1/sqrt(vᵀv/2) so that H = I - v vᵀ.
            cols[k][k] -= alpha;
            let vnorm2 = dot(&cols[k][k..], &cols[k][k..]);
            let scale = libm::sqrt(2.0 / vnorm2);
            cols[k][k..].iter_mut().for_each(|v| *v *= scale);
            rdiag[k] = alpha;
            let (head, tail) = cols.split_at_mut(k + 1);
            let v = &head[k][k..];
            for c in tail.iter_mut() {
                let s = dot(v, &c[k..]);
                axpy(-s, v, &mut c[k..]);
            }
        }
        HouseholderQr { n, m, cols, rdiag }
    }

    /// Diagonal of `R`.
    pub fn r_diagonal(&self) -> &[f64] {
        &self.rdiag
    }

    /// True when every `|Rⱼⱼ|` exceeds `rel_tol · max |Rᵢᵢ|`.
    pub fn is_full_rank(&self, rel_tol: f64) -> bool {
        let max = self.rdiag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        max > 0.0 && self.rdiag.iter().all(|v| v.abs() > rel_tol * max)
    }

    #[inline]
    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.rdiag[i]
        } else {
            self.cols[j][i]
        }
    }

    /// Applies `Qᵀ` to a length-`n` vector in place.
    pub fn apply_qt(&self, b: &mut [f64]) {
        for k in 0..self.m {
            if self.rdiag[k] == 0.0 {
                continue;
            }
            let v = &self.cols[k][k..];
            let s = dot(v, &b[k..]);
            axpy(-s, v, &mut b[k..]);
        }
    }

    /// Applies `Q` to a length-`n` vector in place.
    pub fn apply_q(&self, b: &mut [f64]) {
        for k in (0..self.m).rev() {
            if self.rdiag[k] == 0.0 {
                continue;
            }
            let v = &self.cols[k][k..];
            let s = dot(v, &b[k..]);
            axpy(-s, v, &mut b[k..]);
        }
    }

    /// Least-squares solution of `A x ≈ b`.
    pub fn solve_least_squares(&self, b: &[f64]) -> Vec<f64> {
        let mut qtb = b.to_vec();
        self.apply_qt(&mut qtb);
        self.solve_r(&qtb[..self.m])
    }

    /// Solves `R x = y` for the leading `m` entries.
    pub fn solve_r(&self, y: &[f64]) -> Vec<f64> {
        let mut x = y[..self.m].to_vec();
        for i in (0..self.m).rev() {
            let s = x[i] - (i + 1..self.m).map(|j| self.r(i, j) * x[j]).sum::<f64>();
            x[i] = s / self.rdiag[i];
        }
        x
    }

    /// Solves `Rᵀ x = y`.
    pub fn solve_rt(&self, y: &[f64]) -> Vec<f64> {
        let mut x = y[..self.m].to_vec();
        for i in 0..self.m {
            let s = x[i] - (0..i).map(|j| self.r(j, i) * x[j]).sum::<f64>();
            x[i] = s / self.rdiag[i];
        }
        x
    }

    /// `Q [y; 0]` for a length-`m` vector `y` (thin-Q product).
    pub fn thin_q_times(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        out[..self.m].copy_from_slice(&y[..self.m]);
        self.apply_q(&mut out);
        out
    }
}

/// Solves a general square system by LU with partial pivoting.
pub fn lu_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::Dimension(alloc::format!(
            "LU solve of {}x{} system with rhs length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = norm_inf(m.as_slice()).max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (p, pv) = (k..n)
            .map(|i| (i, m[(i, k)].abs()))
            .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        if pv <= 1e-300 * scale || !pv.is_finite() {
            return Err(Error::Conditioning { jitter: 0.0 });
        }
        if p != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = t;
            }
            x.swap(k, p);
        }
        let pivot = m[(k, k)];
        for i in k + 1..n {
            let f = m[(i, k)] / pivot;
            if f == 0.0 {
                continue;
            }
            m[(i, k)] = 0.0;
            for j in k + 1..n {
                let v = m[(k, j)];
                m[(i, j)] -= f * v;
            }
            x[i] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m[(i, j)] * x[j];
        }
        x[i] = s / m[(i, i)];
    }
    Ok(x)
}
