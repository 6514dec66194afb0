use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical core.
///
/// Variants split into two families: invalid input (shapes, parameters, data
/// tables) and numerical failure (factorizations, unisolvency, divergence).
/// [`Error::is_numerical`] lets callers map them onto distinct exit codes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid kernel configuration: {0}")]
    InvalidKernel(String),
    #[error("derivative order {0} is not supported (expected 0..=4)")]
    DerivativeOrder(usize),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("matrix is not positive definite even after jitter up to {jitter:e}")]
    Conditioning { jitter: f64 },
    #[error(
        "points are not unisolvent for a basis of size m = {m}; \
         need n >= m distinct points and a full-rank Vandermonde matrix (try a lower polynomial order)"
    )]
    Unisolvency { m: usize },
    #[error("negative quadratic form {0:e}; kernel matrix is not positive semi-definite")]
    NegativeQuadraticForm(f64),
    #[error("NaN encountered in conjugate gradient at iteration {0}")]
    CgBreakdown(usize),
    #[error("chain diverged at step {step}: |x| = {norm:e}")]
    Divergence { step: usize, norm: f64 },
    #[error("lambda selection failed for every grid value: {}", format_failures(.0))]
    Tuning(Vec<(f64, String)>),
    #[error("{0}")]
    Unsupported(&'static str),
}

fn format_failures(failures: &[(f64, String)]) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, (lambda, why)) in failures.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        let _ = write!(out, "lambda={lambda}: {why}");
    }
    out
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Conditioning { .. }
                | Error::Unisolvency { .. }
                | Error::NegativeQuadraticForm(_)
                | Error::CgBreakdown(_)
                | Error::Divergence { .. }
                | Error::Tuning(_)
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
