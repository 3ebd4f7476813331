use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sigtest::asymptotics::fourier::{smoothness, sobolev_weight};
use sigtest::asymptotics::{
    empirical_quantile, sample_series_distribution, FourierWeightTable, QuantileMethod, SeriesSamplerConfig,
};
use sigtest::calibration::estimate_scale;
use sigtest::statistic::{empirical_statistic, rank_features};
use sigtest::{forward, input_gradient, NetworkParams};

fn network(seed: u64, k: usize, d: usize) -> NetworkParams {
    NetworkParams::random_glorot(k, d, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn points(seed: u64, n: usize, d: usize) -> Array2<f64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
    Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>(), k in 1usize..12, d in 1usize..6) {
        let p = network(seed, k, d);
        let x = points(seed, 1, d).row(0).to_owned();
        let g = input_gradient(&p, x.view()).unwrap();
        let h = 1e-5;
        for j in 0..d {
            let mut up = x.clone();
            let mut dn = x.clone();
            up[j] += h;
            dn[j] -= h;
            let fd = (forward(&p, up.view()).unwrap() - forward(&p, dn.view()).unwrap()) / (2.0 * h);
            let rel = (fd - g[j]).abs() / g[j].abs().max(1e-3);
            prop_assert!(rel <= 1e-6, "feature {j}: analytic {} fd {fd}", g[j]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn statistic_is_row_permutation_invariant(seed in any::<u64>(), n in 1usize..60) {
        let p = network(seed, 6, 3);
        let x = points(seed, n, 3);
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = x.select(ndarray::Axis(0), &rows);
        let a = empirical_statistic(&p, x.view()).unwrap();
        let b = empirical_statistic(&p, shuffled.view()).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            prop_assert!(*u >= 0.0);
            prop_assert!((u - v).abs() <= 1e-12 * u.max(1e-300));
        }
    }

    #[test]
    fn statistic_equals_brute_force(seed in any::<u64>(), n in 1usize..1500) {
        let p = network(seed, 5, 4);
        let x = points(seed, n, 4);
        let s = empirical_statistic(&p, x.view()).unwrap();
        let mut brute = Array1::<f64>::zeros(4);
        for row in x.rows() {
            let g = input_gradient(&p, row).unwrap();
            brute += &g.mapv(|v| v * v);
        }
        brute /= n as f64;
        for j in 0..4 {
            prop_assert!((s.values[j] - brute[j]).abs() <= 1e-12 * brute[j].max(1e-300));
        }
    }

    #[test]
    fn ranking_is_a_scale_invariant_permutation(seed in any::<u64>(), c in 1e-6f64..1e6) {
        let p = network(seed, 6, 5);
        let x = points(seed, 30, 5);
        let s = empirical_statistic(&p, x.view()).unwrap();
        let order = rank_features(&s);
        let mut sorted = order.clone();
        sorted.sort();
        prop_assert_eq!(sorted, (0..5).collect::<Vec<_>>());
        let mut scaled = s.clone();
        scaled.values.iter_mut().for_each(|v| *v *= c);
        prop_assert_eq!(rank_features(&scaled), order);
    }

    #[test]
    fn hidden_unit_permutation_leaves_output(seed in any::<u64>()) {
        let p = network(seed, 7, 3);
        let mut perm: Vec<usize> = (0..7).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let q = NetworkParams::new(
            p.bias_out,
            p.weights_out.select(ndarray::Axis(0), &perm),
            p.bias_hidden.select(ndarray::Axis(0), &perm),
            p.weights_hidden.select(ndarray::Axis(0), &perm),
        ).unwrap();
        let x = points(seed, 5, 3);
        for row in x.rows() {
            prop_assert!((forward(&p, row).unwrap() - forward(&q, row).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn sobolev_weight_increases_in_each_component(
        index in proptest::collection::vec(0usize..6, 1..4),
        k in 0usize..3,
    ) {
        let k = k % index.len();
        let s = smoothness(index.len());
        let mut bumped = index.clone();
        bumped[k] += 1;
        prop_assert!(sobolev_weight(&index, s) >= 1.0);
        prop_assert!(sobolev_weight(&bumped, s) > sobolev_weight(&index, s));
    }

    #[test]
    fn quantile_monotone_and_equivariant(
        samples in proptest::collection::vec(0.0f64..100.0, 1..200),
        a in 0.01f64..0.99,
        b in 0.01f64..0.99,
    ) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let m = QuantileMethod::Series;
        let q_lo = empirical_quantile(&samples, lo, m).unwrap().value;
        let q_hi = empirical_quantile(&samples, hi, m).unwrap().value;
        prop_assert!(q_lo <= q_hi);
        let t: Vec<f64> = samples.iter().map(|v| v.exp().ln_1p()).collect();
        prop_assert_eq!(empirical_quantile(&t, hi, m).unwrap().value, q_hi.exp().ln_1p());
    }

    #[test]
    fn series_samples_linear_in_scale(seed in any::<u64>(), b2 in 0.0f64..50.0) {
        let table = FourierWeightTable::new(2, 3).unwrap();
        let cfg = |s| SeriesSamplerConfig { table: table.clone(), target_feature: 1, scale_b_squared: s, sample_count: 64, seed };
        let unit = sample_series_distribution(&cfg(1.0)).unwrap();
        let scaled = sample_series_distribution(&cfg(b2)).unwrap();
        for (u, v) in unit.iter().zip(&scaled) {
            prop_assert!(*u >= 0.0);
            prop_assert!((u * b2 - v).abs() <= 1e-12 * v.abs().max(1e-300));
        }
    }

    #[test]
    fn calibration_homogeneous_and_dominates_mean(
        noise in proptest::collection::vec(0.0f64..10.0, 1..6),
        unscaled in proptest::collection::vec(0.01f64..10.0, 1..50),
        c in 0.01f64..100.0,
    ) {
        let base = estimate_scale(&noise, &unscaled).unwrap();
        let scaled: Vec<f64> = noise.iter().map(|v| v * c).collect();
        let other = estimate_scale(&scaled, &unscaled).unwrap();
        prop_assert!((other.b_squared - c * base.b_squared).abs() <= 1e-12 * other.b_squared.max(1e-300));
        let mean_noise = noise.iter().sum::<f64>() / noise.len() as f64;
        prop_assert!(base.b_squared >= mean_noise / base.unscaled_sample_mean * (1.0 - 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn early_stop_minimum_precedes_patience_window(seed in any::<u64>(), patience in 1usize..5) {
        use rand::Rng;
        use sigtest::{train, Dataset, TrainConfig};
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut noisy = |n: usize| {
            let x = Array2::from_shape_fn((n, 2), |_| rng.random_range(-1.0..1.0));
            let y = Array1::from_shape_fn(n, |i| x[[i, 0]] + rng.random_range(-1.0..1.0));
            Dataset::unnamed(x, y).unwrap()
        };
        let (tr, va) = (noisy(64), noisy(64));
        let cfg = TrainConfig {
            hidden_units: 6,
            learning_rate: 0.05,
            early_stop_min_delta: 0.0,
            early_stop_patience: patience,
            max_epochs: 300,
            seed,
            ..TrainConfig::default()
        };
        let fit = train(&tr, &va, &cfg).unwrap();
        // the initial network competes as epoch -1
        let h: Vec<f64> = std::iter::once(fit.initial_val_loss).chain(fit.val_loss_history.iter().copied()).collect();
        prop_assert!(fit.stopped_early);
        let argmin = (0..h.len()).min_by(|&a, &b| h[a].total_cmp(&h[b]).then(a.cmp(&b))).unwrap();
        prop_assert!(argmin + patience < h.len(), "argmin {} len {}", argmin, h.len());
    }
}
