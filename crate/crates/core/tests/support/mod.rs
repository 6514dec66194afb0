//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use secf_core::kernel::KernelConfig;
use secf_core::targets::{CjsData, TargetModel};

pub const STEP: f64 = 2e-2;

/// Five-point first and second derivatives of `f` along coordinate `i`.
pub fn stencil(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize) -> (f64, f64) {
    let at = |t: f64| {
        let mut y = x.to_vec();
        y[i] += t;
        f(&y)
    };
    let (m2, m1, c, p1, p2) = (at(-2.0 * STEP), at(-STEP), at(0.0), at(STEP), at(2.0 * STEP));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * STEP);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * STEP * STEP);
    (d1, d2)
}

/// `Δg(x) + ∇g(x)·u` by finite differences, `u` held fixed.
pub fn stein_fd(g: &dyn Fn(&[f64]) -> f64, x: &[f64], u: &[f64]) -> f64 {
    (0..x.len())
        .map(|i| {
            let (d1, d2) = stencil(g, x, i);
            d2 + d1 * u[i]
        })
        .sum()
}

pub fn nested_stein(cfg: &KernelConfig, x: &[f64], y: &[f64], ux: &[f64], uy: &[f64]) -> f64 {
    let base = |a: &[f64], b: &[f64]| cfg.base(a, b);
    let inner = |xx: &[f64]| stein_fd(&|yy: &[f64]| base(xx, yy), y, uy);
    stein_fd(&inner, x, ux)
}

pub fn random_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

/// Trapezoid rule on `[−14, 14]` against the standard normal density; for
/// smooth, rapidly decaying integrands it converges geometrically.
pub fn gaussian_quadrature(f: impl Fn(f64) -> f64) -> f64 {
    let h = 2.5e-3;
    let k = (14.0 / h) as i64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    (-k..=k).map(|j| {
        let x = j as f64 * h;
        f(x) * norm * (-0.5 * x * x).exp()
    })
    .sum::<f64>()
        * h
}

pub fn gaussian_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        (1..k).step_by(2).map(|v| v as f64).product()
    }
}

pub fn relative_gradient_error(t: &dyn TargetModel, x: &[f64]) -> f64 {
    let g = t.gradient(x);
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..x.len() {
        let h = 1e-5 * x[i].abs().max(1.0);
        let mut up = x.to_vec();
        let mut down = x.to_vec();
        up[i] += h;
        down[i] -= h;
        let fd = (t.log_density(&up) - t.log_density(&down)) / (2.0 * h);
        err = err.max((fd - g[i]).abs());
        scale = scale.max(g[i].abs());
    }
    err / scale.max(1.0)
}

pub fn synthetic_cjs(released: f64, phi: &[f64], p: &[f64]) -> CjsData {
    // phi[i] = φ_{i+1}, p[k] = p_{k+1}; occasions 1..=T with T = phi.len() + 1
    let t = phi.len() + 1;
    let mut rows = Vec::new();
    for i in 0..t - 1 {
        let mut row = vec![0.0; t];
        let mut alive = 1.0;
        for k in i + 1..t {
            alive *= phi[k - 1];
            row[k] = (released * alive * p[k]).round();
            alive *= 1.0 - p[k];
        }
        rows.push(row);
    }
    CjsData::new(vec![released; t - 1], rows).unwrap()
}

pub fn logit(v: f64) -> f64 {
    (v / (1.0 - v)).ln()
}

