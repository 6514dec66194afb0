use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use secf_core::basis::{enumerate_basis, vandermonde};
use secf_core::diagnostics::ksd_of_weights;
use secf_core::estimators::{cf_estimate, secf_estimate};
use secf_core::kernel::{assemble_stein_matrix, KernelConfig};
use secf_core::samplers::iid_standard_normal;
use secf_core::tuning::median_heuristic;
use secf_core::{Matrix, SampleSet};

fn points(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-10.0..10.0f64, rows * cols).prop_map(move |v| Matrix::from_row_major(rows, cols, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn median_is_translation_permutation_and_scale_aware(
        x in points(7, 2),
        shift in prop::array::uniform2(-5.0..5.0f64),
        c in 0.1..10.0f64,
        seed in any::<u64>(),
    ) {
        let base = median_heuristic(&x).unwrap();
        let moved = Matrix::from_fn(7, 2, |i, j| x[(i, j)] + shift[j]);
        prop_assert!((median_heuristic(&moved).unwrap() - base).abs() <= 1e-9 * base);
        let mut order: Vec<usize> = (0..7).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..7).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        prop_assert_eq!(median_heuristic(&x.select_rows(&order)).unwrap(), base);
        let scaled = Matrix::from_fn(7, 2, |i, j| -c * x[(i, j)]);
        prop_assert!((median_heuristic(&scaled).unwrap() - c * base).abs() <= 1e-9 * c * base);
    }

    #[test]
    fn dedupe_is_idempotent(raw in prop::collection::vec(0u8..4, 24)) {
        let pts = Matrix::from_fn(12, 2, |i, j| raw[2 * i + j] as f64);
        let s = SampleSet::new(pts.clone(), pts, vec![]).unwrap();
        let once = s.dedupe();
        prop_assert_eq!(once.dedupe(), once.clone());
        let distinct: std::collections::BTreeSet<(u8, u8)> = (0..12).map(|i| (raw[2 * i], raw[2 * i + 1])).collect();
        prop_assert_eq!(once.len(), distinct.len());
    }

    #[test]
    fn secf_is_affine_equivariant(seed in 0u64..1000, alpha in -3.0..3.0f64, beta in -3.0..3.0f64) {
        let s = iid_standard_normal(2, 30, seed).unwrap();
        let k0 = assemble_stein_matrix(&KernelConfig::rational_quadratic(1.0).unwrap(), &s).unwrap();
        let p = vandermonde(&enumerate_basis(2, 1).unwrap(), &s).unwrap();
        let f: Vec<f64> = (0..30).map(|i| (s.point(i)[0] * s.point(i)[1]).sin()).collect();
        let g: Vec<f64> = f.iter().map(|v| alpha * v + beta).collect();
        let ef = secf_estimate(&k0, &p, &f).unwrap();
        let eg = secf_estimate(&k0, &p, &g).unwrap();
        prop_assert!((eg.estimate - (alpha * ef.estimate + beta)).abs() <= 1e-8);
        let (df, dg) = (ef.diagnostics.unwrap(), eg.diagnostics.unwrap());
        prop_assert!((dg.ksd - df.ksd).abs() <= 1e-10 * df.ksd.max(1.0));
        prop_assert!((dg.seminorm_proxy - alpha.abs() * df.seminorm_proxy).abs() <= 1e-6 * df.seminorm_proxy.max(1e-3));
    }
}

#[test]
fn bound_product_ignores_row_order() {
    let s = iid_standard_normal(3, 40, 12).unwrap();
    let f: Vec<f64> = (0..40).map(|i| s.point(i)[0].cos() + s.point(i)[2]).collect();
    let kernel = KernelConfig::gaussian(1.3).unwrap();
    let basis = enumerate_basis(3, 1).unwrap();
    let run = |s: &SampleSet, f: &[f64]| {
        let k0 = assemble_stein_matrix(&kernel, s).unwrap();
        let p = vandermonde(&basis, s).unwrap();
        secf_estimate(&k0, &p, f).unwrap()
    };
    let order: Vec<usize> = (0..40).rev().collect();
    let a = run(&s, &f);
    let b = run(&s.select(&order), &order.iter().map(|&i| f[i]).collect::<Vec<_>>());
    let (da, db) = (a.diagnostics.unwrap(), b.diagnostics.unwrap());
    assert!((da.bound_product - db.bound_product).abs() <= 1e-8 * da.bound_product);
    assert!((a.estimate - b.estimate).abs() <= 1e-10);
}

#[test]
fn constrained_weights_beat_equal_weights() {
    let kernel = KernelConfig::rational_quadratic(1.0).unwrap();
    for seed in 0..10 {
        let s = iid_standard_normal(2, 35, seed).unwrap();
        let k0 = assemble_stein_matrix(&kernel, &s).unwrap();
        let r = cf_estimate(&k0, &vec![0.0; 35]).unwrap();
        let equal = ksd_of_weights(k0.values(), &vec![1.0 / 35.0; 35]).unwrap();
        assert!(r.diagnostics.unwrap().ksd <= equal + 1e-12);
    }
}
