//! Checks against independent oracles: finite differences of the base
//! kernel, trapezoid quadrature and closed-form Gaussian moments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use secf_core::basis::{enumerate_basis, stein_poly_eval, vandermonde, MultiIndex};
use secf_core::estimators::{secf_estimate, zv_estimate};
use secf_core::kernel::{assemble_stein_matrix, KernelConfig, KernelFamily};
use secf_core::samplers::iid_standard_normal;
use secf_core::targets::{gaussian_target, CjsTarget, LogisticTarget, TargetModel};
use secf_core::Matrix;

mod support;
use support::*;

#[test]
fn stein_kernel_matches_nested_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for family in [KernelFamily::RationalQuadratic, KernelFamily::Gaussian, KernelFamily::Matern] {
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let d = rng.random_range(1..=3);
            let lambda = 0.8 + 1.2 * rng.random::<f64>();
            let cfg = KernelConfig::new(family, lambda, 4.5).unwrap();
            let x = random_vec(&mut rng, d, 1.0);
            let y = random_vec(&mut rng, d, 1.0);
            let ux = random_vec(&mut rng, d, 2.0);
            let uy = random_vec(&mut rng, d, 2.0);
            let exact = cfg.stein(&x, &y, &ux, &uy).unwrap();
            let fd = nested_stein(&cfg, &x, &y, &ux, &uy);
            let scale = exact.abs().max(1e-2 * cfg.stein(&x, &x, &ux, &ux).unwrap().abs());
            worst = worst.max((fd - exact).abs() / scale);
        }
        assert!(worst <= 1e-4, "{}: worst relative error {worst:e}", family.name());
    }
}

#[test]
fn stein_mapped_functions_have_zero_mean() {
    for a in 1..=3u32 {
        let alpha = MultiIndex::new(vec![a]);
        let v = gaussian_quadrature(|x| stein_poly_eval(&alpha, &[x], &[-x]).unwrap());
        assert!(v.abs() <= 1e-6, "alpha={a}: {v:e}");
    }
    let cfg = KernelConfig::rational_quadratic(1.0).unwrap();
    for y in [-1.0, 0.0, 1.0, 2.0] {
        let v = gaussian_quadrature(|x| cfg.stein(&[x], &[y], &[-x], &[-y]).unwrap());
        assert!(v.abs() <= 1e-4, "y={y}: {v:e}");
    }
}

#[test]
fn secf_integrates_monomials_exactly() {
    for d in 1..=3 {
        let s = iid_standard_normal(d, 50, 100 + d as u64).unwrap();
        let k0 = assemble_stein_matrix(&KernelConfig::rational_quadratic(1.0).unwrap(), &s).unwrap();
        for r in 1..=2 {
            let basis = enumerate_basis(d, r).unwrap();
            let p = vandermonde(&basis, &s).unwrap();
            for alpha in basis.indices() {
                let f: Vec<f64> = (0..50).map(|i| alpha.monomial(s.point(i))).collect();
                let truth: f64 = alpha.exponents().iter().map(|&k| gaussian_moment(k)).product();
                let est = secf_estimate(&k0, &p, &f).unwrap().estimate;
                assert!((est - truth).abs() <= 1e-6, "d={d} r={r} alpha={alpha:?}: {est} vs {truth}");
            }
        }
    }
}

#[test]
fn constructed_integrands_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let d = 3;
    let s = iid_standard_normal(d, 60, 8).unwrap();
    let k0 = assemble_stein_matrix(&KernelConfig::gaussian(1.5).unwrap(), &s).unwrap();
    let p = vandermonde(&enumerate_basis(d, 2).unwrap(), &s).unwrap();
    for _ in 0..20 {
        // φ = bᵀx + xᵀAx, so 𝓛φ = 2 tr A − bᵀx − 2xᵀAx under N(0, I)
        let b = random_vec(&mut rng, d, 1.0);
        let raw = random_vec(&mut rng, d * d, 1.0);
        let a = Matrix::from_fn(d, d, |i, j| 0.5 * (raw[i * d + j] + raw[j * d + i]));
        let trace: f64 = (0..d).map(|i| a[(i, i)]).sum();
        let f: Vec<f64> = (0..60)
            .map(|i| {
                let x = s.point(i);
                let bx: f64 = b.iter().zip(x).map(|(u, v)| u * v).sum();
                1.0 + 2.0 * trace - bx - 2.0 * a.quadratic_form(x)
            })
            .collect();
        assert!((secf_estimate(&k0, &p, &f).unwrap().estimate - 1.0).abs() <= 1e-8);
        assert!((zv_estimate(&p, &f).unwrap().estimate - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn target_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let gauss = gaussian_target(4).unwrap();
    let phi = [0.6, 0.65, 0.7, 0.6, 0.55, 0.6];
    let p = [0.0, 0.5, 0.6, 0.55, 0.7, 0.6, 0.65];
    let cjs = CjsTarget::new(synthetic_cjs(150.0, &phi, &p));
    let design = Matrix::from_fn(80, 4, |i, j| if j == 0 { 1.0 } else { ((i * 31 + j * 17) % 23) as f64 / 11.0 - 1.0 });
    let y: Vec<f64> = (0..80).map(|i| ((i * 7) % 3 == 0) as u8 as f64).collect();
    let logistic = LogisticTarget::with_default_priors(design, y).unwrap();
    let targets: [&dyn TargetModel; 3] = [&gauss, &cjs, &logistic];
    for t in targets {
        for _ in 0..10 {
            let x = random_vec(&mut rng, t.dim(), 1.5);
            let e = relative_gradient_error(t, &x);
            assert!(e <= 1e-5, "{}: relative error {e:e}", t.name());
        }
    }
}

#[test]
fn cjs_score_vanishes_near_the_truth_for_large_counts() {
    let phi = [0.6, 0.65, 0.7, 0.6, 0.55, 0.6];
    let p = [0.0, 0.5, 0.6, 0.55, 0.7, 0.6, 0.65];
    let target = CjsTarget::new(synthetic_cjs(1e6, &phi, &p));
    let mut truth: Vec<f64> = phi[..5].iter().map(|&v| logit(v)).collect();
    truth.extend(p[1..6].iter().map(|&v| logit(v)));
    truth.push(logit(phi[5] * p[6]));
    let g = target.gradient(&truth);
    // the score at the truth is zero for expected counts, up to rounding and
    // the O(1) prior term; the curvature is of order 1e5
    let worst = g.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    assert!(worst < 50.0, "score at truth {g:?}");
}
