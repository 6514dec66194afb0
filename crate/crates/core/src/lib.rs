//! Semi-exact control functionals for post-processing MCMC output.
//!
//! Given states `x⁽ⁱ⁾`, score gradients `∇log p(x⁽ⁱ⁾)` and integrand values
//! `f(x⁽ⁱ⁾)`, the estimators in this crate return variance-reduced estimates
//! of `∫ f p`. The proposed estimator interpolates `f` with a Stein-kernel
//! expansion plus a Stein-mapped polynomial part, so that it integrates the
//! polynomial part exactly; the classical Monte Carlo, zero-variance and
//! control-functional estimators are provided for comparison, together with
//! a Nyström approximation, lengthscale tuning, a kernel Stein discrepancy
//! diagnostic, Langevin samplers and a few built-in posterior targets.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, timing and the
//! command-line interface live in the `secf` companion crate.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod basis;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod integrands;
pub mod kernel;
pub mod linalg;
pub mod nystrom;
pub mod samplers;
pub mod samples;
pub mod special;
pub mod targets;
pub mod tuning;

pub use basis::{enumerate_basis, stein_poly_eval, vandermonde, MultiIndex, PolynomialBasis};
pub use diagnostics::{error_bound, ksd_of_weights, DiagnosticReport};
pub use error::{Error, Result};
pub use estimators::{cf_estimate, mc_estimate, secf_estimate, secf_solve, zv_estimate, EstimatorResult, Method};
pub use kernel::{assemble_stein_matrix, psi_derivative, stein_kernel_eval, KernelConfig, KernelFamily, SteinKernelMatrix};
pub use linalg::Matrix;
pub use nystrom::{asecf_estimate, NystromConfig, NystromSolver};
pub use samplers::{mala_chain, ula_chain, ChainConfig, SamplerKind};
pub use samples::SampleSet;
pub use targets::{CjsData, CjsTarget, GaussianTarget, LogisticTarget, TargetModel};
pub use tuning::{cv_select_lambda, median_heuristic};
