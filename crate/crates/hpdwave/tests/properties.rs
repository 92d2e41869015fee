//! Property-based invariants of the geometry and transform layers.

mod common;

use common::random_curve;
use hpdwave::manifold::{dist, exp_map, geodesic, log_map, MetricKind};
use hpdwave::rng::{random_hermitian, random_hpd, Rng64, RngSeed};
use hpdwave::shrinkage::{cpress_objective, cpress_prune, TracePyramid};
use hpdwave::wavelet::{forward, inverse};
use proptest::prelude::*;

fn metric_strategy() -> impl Strategy<Value = MetricKind> {
    prop_oneof![
        Just(MetricKind::Riemannian),
        Just(MetricKind::LogEuclidean),
        Just(MetricKind::Cholesky),
        Just(MetricKind::Euclidean),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn round_trip_is_identity(
        metric in metric_strategy(),
        order in prop_oneof![Just(1usize), Just(3), Just(5), Just(7), Just(9)],
        scales in 3u32..=5,
        dim in 1usize..=3,
        seed in 0u64..1_000_000,
    ) {
        let mut rng = RngSeed(seed).stream(7);
        let curve = random_curve(&mut rng, 1 << scales, dim, 0.5);
        let dec = forward(&curve, order, metric).unwrap();
        prop_assert_eq!(dec.num_coefficients(), (1 << scales) - 1);
        let back = inverse(&dec).unwrap();
        let err = curve.max_distance(&back).unwrap();
        prop_assert!(err <= 1e-8, "round trip error {} for {:?} N={}", err, metric, order);
    }

    #[test]
    fn whitened_norms_match_metric_norms(seed in 0u64..1_000_000) {
        let mut rng = RngSeed(seed).stream(11);
        let curve = random_curve(&mut rng, 16, 2, 0.6);
        let dec = forward(&curve, 3, MetricKind::Riemannian).unwrap();
        let white = dec.whitened().unwrap();
        for j in 1..=dec.num_scales() {
            for (k, coeff) in dec.level(j).iter().enumerate() {
                let base = hpdwave::HpdMatrix::from_matrix(coeff.base.clone()).unwrap();
                let h = hpdwave::HermitianMatrix::symmetrize(coeff.delta.clone());
                let metric_norm = hpdwave::manifold::metric_norm(&base, &h).unwrap();
                let white_norm = white[j - 1][k].frobenius_norm();
                prop_assert!((metric_norm - white_norm).abs() <= 1e-10 * metric_norm.max(1.0));
            }
        }
    }

    #[test]
    fn exp_log_round_trip(seed in 0u64..1_000_000) {
        // Moderate amplitudes: the relative round-trip accuracy degrades
        // with the condition number of the inner matrices.
        let mut rng = RngSeed(seed).stream(13);
        let p = random_hpd(&mut rng, 3, 0.35);
        let h = random_hermitian(&mut rng, 3, 0.35);
        let q = exp_map(&p, &h).unwrap();
        let back = log_map(&p, &q).unwrap();
        prop_assert!(back.sub(&h).frobenius_norm() <= 1e-9 * h.frobenius_norm().max(1.0));
        let d = dist(MetricKind::Riemannian, &p, &q).unwrap();
        let n = hpdwave::manifold::metric_norm(&p, &h).unwrap();
        prop_assert!((d - n).abs() <= 1e-9 * n.max(1.0));
    }

    #[test]
    fn geodesic_hits_endpoints(metric in metric_strategy(), seed in 0u64..1_000_000) {
        let mut rng = RngSeed(seed).stream(17);
        let p = random_hpd(&mut rng, 2, 0.6);
        let q = random_hpd(&mut rng, 2, 0.6);
        let g0 = geodesic(metric, &p, &q, 0.0).unwrap();
        let g1 = geodesic(metric, &p, &q, 1.0).unwrap();
        prop_assert!(g0.matrix().max_abs_diff(p.matrix()) <= 1e-9);
        prop_assert!(g1.matrix().max_abs_diff(q.matrix()) <= 1e-9);
        // Midpoint is metric-equidistant from the endpoints.
        let mid = geodesic(metric, &p, &q, 0.5).unwrap();
        let a = dist(metric, &p, &mid).unwrap();
        let b = dist(metric, &mid, &q).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * (a + b).max(1.0));
    }

    #[test]
    fn cpress_tree_constraint_and_nesting(seed in 0u64..1_000_000) {
        let mut rng = Rng64::new(seed);
        let traces = TracePyramid::from_levels(
            (1..=5)
                .map(|j| (0..1usize << (j - 1)).map(|_| 2.0 * rng.next_gaussian()).collect())
                .collect(),
        );
        let mut prev: Option<hpdwave::shrinkage::LabelTree> = None;
        let mut prev_obj = -1.0_f64;
        for lambda in [0.0, 0.4, 0.9, 2.0, 5.0] {
            let labels = cpress_prune(&traces, lambda);
            prop_assert!(labels.is_rooted_tree());
            let obj = cpress_objective(&traces, &labels, lambda);
            prop_assert!(obj >= prev_obj - 1e-12);
            prev_obj = obj;
            if let Some(p) = &prev {
                for j in 1..=labels.num_scales() {
                    for k in 0..labels.level(j).len() {
                        if labels.keep(j, k) {
                            prop_assert!(p.keep(j, k), "kept sets must be nested");
                        }
                    }
                }
            }
            prev = Some(labels);
        }
    }
}
