//! Polynomial spaces `𝒫ʳ` mapped through the Langevin Stein operator, and
//! the Vandermonde matrix `P` whose columns are `1, 𝓛φ₁, …, 𝓛φ_{m−1}`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::samples::SampleSet;

/// Exponent vector `α ∈ ℕ₀ᵈ` of the monomial `x^α`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// `x^α`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&a, &xi)| libm::pow(xi, a as f64)).product()
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(a: &[u32]) -> Self {
        MultiIndex(a.to_vec())
    }
}

/// The multi-indices `0 < |α| ≤ r` in graded-lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialBasis {
    dim: usize,
    order: u32,
    indices: Vec<MultiIndex>,
}

impl PolynomialBasis {
    pub fn new(dim: usize, order: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("basis dimension must be at least 1".into()));
        }
        let mut indices = Vec::new();
        let mut scratch = vec![0u32; dim];
        for degree in 1..=order {
            push_degree(&mut indices, &mut scratch, 0, degree);
        }
        Ok(PolynomialBasis { dim, order, indices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Number of columns of the Vandermonde matrix: the constant plus one per index.
    pub fn m(&self) -> usize {
        1 + self.indices.len()
    }

    /// Row `[1, 𝓛φ₁(x), …]` of the Vandermonde matrix.
    pub fn row_into(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
        for (slot, alpha) in out[1..].iter_mut().zip(&self.indices) {
            *slot = stein_monomial(alpha.exponents(), x, u);
        }
    }
}

fn push_degree(out: &mut Vec<MultiIndex>, scratch: &mut [u32], pos: usize, remaining: u32) {
    if pos + 1 == scratch.len() {
        scratch[pos] = remaining;
        out.push(MultiIndex(scratch.to_vec()));
        scratch[pos] = 0;
        return;
    }
    for a in (0..=remaining).rev() {
        scratch[pos] = a;
        push_degree(out, scratch, pos + 1, remaining - a);
    }
    scratch[pos] = 0;
}

/// Graded-lex basis of `𝒫ʳ` in `d` dimensions.
pub fn enumerate_basis(d: usize, r: u32) -> Result<PolynomialBasis> {
    PolynomialBasis::new(d, r)
}

/// `x^β` where `β = α − shift·eᵢ`, skipping the (zero-coefficient) cases
/// with negative exponents.
fn monomial_shifted(alpha: &[u32], x: &[f64], i: usize, shift: u32) -> f64 {
    let mut v = 1.0;
    for (k, (&a, &xk)) in alpha.iter().zip(x).enumerate() {
        let e = if k == i { a - shift } else { a };
        if e > 0 {
            v *= libm::pow(xk, e as f64);
        }
    }
    v
}

fn stein_monomial(alpha: &[u32], x: &[f64], u: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..alpha.len() {
        let a = alpha[i];
        if a == 0 {
            continue;
        }
        let af = a as f64;
        if a >= 2 {
            total += af * (af - 1.0) * monomial_shifted(alpha, x, i, 2);
        }
        total += af * u[i] * monomial_shifted(alpha, x, i, 1);
    }
    total
}

/// `(𝓛x^α)(x) = Δx^α + ∇x^α · u` with `u = ∇log p(x)`.
pub fn stein_poly_eval(alpha: &MultiIndex, x: &[f64], u: &[f64]) -> Result<f64> {
    if alpha.is_zero() {
        return Err(Error::InvalidArgument("the zero multi-index maps to the zero function".into()));
    }
    if x.len() != alpha.dim() || u.len() != alpha.dim() {
        return Err(Error::Dimension(alloc::format!(
            "multi-index of dimension {} applied to point of length {} and score of length {}",
            alpha.dim(),
            x.len(),
            u.len()
        )));
    }
    Ok(stein_monomial(alpha.exponents(), x, u))
}

/// `n × m` matrix with `[P]ᵢ₁ = 1` and `[P]ᵢ,ⱼ₊₁ = (𝓛φⱼ)(x⁽ⁱ⁾)`.
pub fn vandermonde(basis: &PolynomialBasis, samples: &SampleSet) -> Result<Matrix> {
    if samples.dim() != basis.dim() {
        return Err(Error::Dimension(alloc::format!(
            "basis of dimension {} for samples of dimension {}",
            basis.dim(),
            samples.dim()
        )));
    }
    let (n, m) = (samples.len(), basis.m());
    let mut p = Matrix::zeros(n, m);
    for i in 0..n {
        basis.row_into(samples.point(i), samples.gradient(i), p.row_mut(i));
    }
    Ok(p)
}
