use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssakit::detect::Correction;
use ssakit::predict::NoiseModel;
use ssakit::trajectory::diagonal_average;
use ssakit::*;
use std::f64::consts::PI;

fn series_strategy(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, min..=max)
}

fn with_window(min: usize, max: usize) -> impl Strategy<Value = (Vec<f64>, usize)> {
    series_strategy(min, max).prop_flat_map(|x| {
        let n = x.len();
        (Just(x), 2..n - 1)
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sines(n: usize, terms: &[(f64, f64, f64)]) -> Vec<f64> {
    (0..n)
        .map(|i| terms.iter().map(|(a, w, p)| a * (2.0 * PI * w * i as f64 + p).cos()).sum())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn products_match_dense_and_are_adjoint((x, l) in with_window(5, 400), seed in any::<u64>()) {
        let s = Series::new(x).unwrap();
        let op = embed(&s, l).unwrap();
        let k = op.window().lagged_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = (0..k).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let z: Vec<f64> = (0..l).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let xy = op.matvec(&y).unwrap();
        let xtz = op.rmatvec(&z).unwrap();
        let dense = op.to_dense();
        let slow = &dense * nalgebra::DVector::from_vec(y.clone());
        let scale = 1.0 + op.frobenius_norm_sq().sqrt();
        prop_assert!(max_diff(&xy, slow.as_slice()) <= 1e-10 * scale);
        prop_assert!((dot(&xy, &z) - dot(&y, &xtz)).abs() <= 1e-9 * scale * (k as f64).sqrt());
    }

    #[test]
    fn weights_sum_to_matrix_size(n in 3usize..2000, frac in 0.0f64..1.0) {
        let l = 2 + ((n - 3) as f64 * frac) as usize;
        let w = WindowConfig::new(n, l).unwrap();
        let total: f64 = w.weights().iter().sum();
        prop_assert_eq!(total as usize, w.window_len() * w.lagged_count());
    }

    #[test]
    fn hankelization_is_idempotent(n in 4usize..40, frac in 0.0f64..1.0, seed in any::<u64>()) {
        let l = 2 + ((n - 3) as f64 * frac) as usize;
        let w = WindowConfig::new(n, l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = nalgebra::DMatrix::from_fn(l, n - l + 1, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let once = diagonal_average(&m, w).unwrap();
        let again = diagonal_average(&embed(&Series::new(once.clone()).unwrap(), l).unwrap().to_dense(), w).unwrap();
        prop_assert!(max_diff(&once, &again) <= 1e-14);
    }

    #[test]
    fn transposition_keeps_singular_values((x, l) in with_window(6, 120)) {
        let s = Series::new(x).unwrap();
        let k = s.len() - l + 1;
        let r = l.min(k).min(4);
        let a = decompose_basic(&s, l, r).unwrap().sigmas();
        let b = decompose_basic(&s, k, r).unwrap().sigmas();
        prop_assert_eq!(a.len(), b.len());
        let scale = a.first().copied().unwrap_or(0.0) + 1e-300;
        prop_assert!(max_diff(&a, &b) <= 1e-9 * scale);
    }

    #[test]
    fn full_reconstruction_is_complete((x, l) in with_window(5, 150)) {
        let s = Series::new(x.clone()).unwrap();
        let k = l.min(s.len() - l + 1);
        let dec = decompose_basic(&s, l, k).unwrap();
        let all: Vec<usize> = (0..dec.len()).collect();
        let rec = dec.reconstruct_indices(&all).unwrap();
        let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max_diff(&rec, &x) <= 1e-9 * scale);
    }

    #[test]
    fn groups_and_residual_sum_to_series((x, l) in with_window(8, 150), split in 1usize..4) {
        let s = Series::new(x.clone()).unwrap();
        let k = l.min(s.len() - l + 1).min(6);
        let dec = decompose_basic(&s, l, k).unwrap();
        let split = split.min(dec.len());
        let mut grouping = Grouping::new();
        if split > 0 {
            grouping.insert("a", 1..=split).unwrap();
        }
        if dec.len() > split {
            grouping.insert("b", split + 1..=dec.len()).unwrap();
        }
        let rec = reconstruct(&dec, &grouping).unwrap();
        let total: Vec<f64> = (0..x.len())
            .map(|i| rec.groups.values().map(|g| g[i]).sum::<f64>() + rec.residual[i])
            .collect();
        prop_assert!(max_diff(&total, &x) <= 1e-9 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
        let roundtrip = Grouping::from_json(&grouping.to_json()).unwrap();
        prop_assert_eq!(roundtrip, grouping);
    }

    #[test]
    fn wcor_is_a_correlation_matrix((x, l) in with_window(10, 150)) {
        let s = Series::new(x).unwrap();
        let k = l.min(s.len() - l + 1).min(6);
        let dec = decompose_basic(&s, l, k).unwrap();
        let w = wcor(&dec, dec.len()).unwrap();
        for i in 0..w.size() {
            if !w.zero_norm().contains(&i) {
                prop_assert!((w.get(i, i) - 1.0).abs() <= 1e-12);
            }
            for j in 0..w.size() {
                prop_assert!(w.get(i, j).abs() <= 1.0 + 1e-12);
                prop_assert_eq!(w.get(i, j), w.get(j, i));
            }
        }
    }

    #[test]
    fn clustering_ignores_component_scaling(
        (x, l) in with_window(20, 120),
        factors in prop::collection::vec(prop_oneof![-5.0f64..-0.2, 0.2f64..5.0], 6),
        groups in 1usize..4,
    ) {
        let s = Series::new(x).unwrap();
        let k = l.min(s.len() - l + 1).min(6);
        let dec = decompose_basic(&s, l, k).unwrap();
        let comps: Vec<Vec<f64>> = (0..dec.len()).map(|i| dec.elementary(i).unwrap()).collect();
        let scaled: Vec<Vec<f64>> = comps
            .iter()
            .zip(&factors)
            .map(|(c, f)| c.iter().map(|v| v * f).collect())
            .collect();
        let groups = groups.min(comps.len());
        let a = cluster_groups(&wcor_of_series(&comps, dec.window()).unwrap(), groups).unwrap();
        let b = cluster_groups(&wcor_of_series(&scaled, dec.window()).unwrap(), groups).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn periodogram_preserves_energy(x in series_strategy(2, 300)) {
        let p = periodogram::periodogram(&x);
        let energy: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!((p.iter().sum::<f64>() - energy).abs() <= 1e-9 * (1.0 + energy));
    }

    #[test]
    fn minnorm_lrr_governs_sum_of_sines(
        amps in prop::collection::vec(0.5f64..3.0, 1..3),
        freqs in prop::collection::vec(0.03f64..0.47, 2),
        phases in prop::collection::vec(0.0f64..6.0, 2),
    ) {
        let freqs = if (freqs[0] - freqs[1]).abs() < 0.02 { vec![freqs[0]] } else { freqs };
        let terms: Vec<(f64, f64, f64)> = amps.iter().zip(&freqs).zip(&phases).map(|((a, w), p)| (*a, *w, *p)).collect();
        let x = sines(80, &terms);
        let r = 2 * terms.len();
        let dec = decompose_basic(&Series::new(x.clone()).unwrap(), 30, r).unwrap();
        prop_assume!(dec.len() == r);
        let idx: Vec<usize> = (1..=r).collect();
        let subspace = SubspaceModel::from_decomposition(&dec, &idx).unwrap();
        for (i, u) in subspace.basis().iter().enumerate() {
            for (j, v) in subspace.basis().iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot(u, v) - expected).abs() <= 1e-8);
            }
        }
        prop_assume!(subspace.verticality() < 0.99);
        let lrr = minnorm_lrr(&subspace).unwrap();
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(lrr.max_residual(&x) <= 1e-8 * scale);

        let roots = char_roots(&lrr);
        let total: usize = roots.iter().map(|r| r.multiplicity).sum();
        prop_assert_eq!(total, lrr.order());
        for root in &roots {
            if root.value.im.abs() > 1e-8 {
                let conj = root.value.conj();
                prop_assert!(roots.iter().any(|o| (o.value - conj).norm() <= 1e-6 * (1.0 + conj.norm())));
            }
        }
    }

    #[test]
    fn extract_signal_is_scale_equivariant((x, l) in with_window(10, 100), c in 0.1f64..20.0) {
        let s = Series::new(x.clone()).unwrap();
        let r = 2.min(l.min(x.len() - l + 1) - 1);
        let base = extract_signal(&s, l, r).unwrap();
        let scaled = extract_signal(&Series::new(x.iter().map(|v| c * v).collect()).unwrap(), l, r).unwrap();
        let expect: Vec<f64> = base.iter().map(|v| c * v).collect();
        let scale = c * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        prop_assert!(max_diff(&scaled, &expect) <= 1e-8 * scale);
    }

    #[test]
    fn forecast_commutes_with_time_shift(w in 0.02f64..0.45, p in 0.0f64..6.0, shift in 1usize..10) {
        let long = sines(60 + shift, &[(1.0, w, p)]);
        let early = Series::new(long[..60].to_vec()).unwrap();
        let late = Series::new(long[shift..].to_vec()).unwrap();
        let h = 20;
        let f1 = forecast(&decompose_basic(&early, 24, 2).unwrap(), &[1, 2], h, ForecastMethod::Recurrent).unwrap();
        let f2 = forecast(&decompose_basic(&late, 24, 2).unwrap(), &[1, 2], h, ForecastMethod::Recurrent).unwrap();
        prop_assert!(max_diff(&f1.forecast[shift..], &f2.forecast[..h - shift]) <= 1e-8);
    }

    #[test]
    fn iterative_gapfill_keeps_observed_values(
        x in series_strategy(30, 80),
        holes in prop::collection::vec(any::<prop::sample::Index>(), 1..5),
    ) {
        let mut mask = vec![true; x.len()];
        for h in &holes {
            mask[h.index(x.len())] = false;
        }
        let s = Series::with_mask(x.clone(), mask.clone()).unwrap();
        let out = gapfill_iterative(&s, 10, 2, 1e-9, 50).unwrap();
        for (i, present) in mask.iter().enumerate() {
            if *present {
                prop_assert_eq!(out.completed[i], x[i]);
            } else {
                prop_assert!(out.completed[i].is_finite());
            }
        }
    }

    #[test]
    fn bootstrap_intervals_bracket_forecast(x in series_strategy(40, 70), seed in any::<u64>(), resample in any::<bool>()) {
        let opts = BootstrapOptions {
            replications: 100,
            seed,
            noise: if resample { NoiseModel::Resample } else { NoiseModel::Gaussian },
            ..BootstrapOptions::default()
        };
        let res = bootstrap_intervals(&Series::new(x).unwrap(), 12, 2, 8, &opts).unwrap();
        let iv = res.intervals.unwrap();
        for ((lo, pt), hi) in iv.lower.iter().zip(&res.forecast).zip(&iv.upper) {
            prop_assert!(lo <= pt && pt <= hi);
        }
    }

    #[test]
    fn red_noise_model_and_test_are_well_formed(seed in any::<u64>(), phi in -0.9f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Ar1Model::new(phi, 1.0, 2.0).unwrap().simulate(120, &mut rng);
        let s = Series::new(x).unwrap();
        let fitted = fit_ar1(&s).unwrap();
        prop_assert!(fitted.phi.abs() < 1.0);
        let opts = McssaOptions { surrogates: 100, seed, correction: Correction::None, ..McssaOptions::default() };
        let report = mcssa_test(&s, 12, &opts).unwrap();
        for t in &report.tests {
            prop_assert!(t.statistic >= 0.0);
            prop_assert!(t.lower <= t.upper);
        }
    }
}
