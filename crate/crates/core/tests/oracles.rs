use std::f64::consts::PI;

use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sigtest::asymptotics::{
    argmax_draws, sample_series_distribution, CovarianceMode, FourierWeightTable, RandomFunctionEnsemble,
    SeriesSamplerConfig,
};
use sigtest::calibration::add_noise_features;
use sigtest::simulation::{
    correlated_uniforms, cholesky, generate_dgp, normal_cdf, paper_covariance, regression_function,
    regression_gradient, true_lambda_oracle, ttest_baseline, DgpConfig,
};
use sigtest::statistic::leave_one_out;
use sigtest::{predict_mse, train, Dataset, NetworkParams, TrainConfig};

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn series_sampler_matches_brute_force_d1_n2() {
    let draws = 1_000_000;
    let table = FourierWeightTable::new(1, 2).unwrap();
    let fast = sample_series_distribution(&SeriesSamplerConfig {
        table,
        target_feature: 0,
        scale_b_squared: 1.0,
        sample_count: draws,
        seed: 5,
    })
    .unwrap();

    // n ∈ {0, 1}, two basis functions per index, one-degree chi-squares
    let gam = [0.0, PI * PI];
    let d2 = [1.0, 1.0 + gam[1] + gam[1] * gam[1]];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let brute: Vec<f64> = (0..draws)
        .map(|_| {
            let (mut num, mut den) = (0.0, 0.0);
            for n in 0..2 {
                for _ in 0..2 {
                    let z: f64 = rng.sample(StandardNormal);
                    num += gam[n] / (d2[n] * d2[n]) * z * z;
                    den += z * z / d2[n];
                }
            }
            num / den
        })
        .collect();
    let (ma, sa) = mean_and_se(&fast);
    let (mb, sb) = mean_and_se(&brute);
    assert!((ma - mb).abs() <= 3.0 * (sa * sa + sb * sb).sqrt(), "{ma} vs {mb}");
}

fn constant_ensemble(levels: &[f64]) -> RandomFunctionEnsemble {
    let functions = levels
        .iter()
        .map(|&c| NetworkParams::new(c, Array1::zeros(1), Array1::zeros(1), Array2::zeros((1, 1))).unwrap())
        .collect();
    let reference = Array2::from_shape_fn((10, 1), |(i, _)| i as f64 / 10.0);
    RandomFunctionEnsemble::from_functions(functions, reference.view(), CovarianceMode::Diagonal).unwrap()
}

/// P(argmax = c) = ∫ φ(z) Π_{a≠c} Φ(σ_c z / σ_a) dz by the trapezoid rule.
fn argmax_probability(sigmas: &[f64], c: usize) -> f64 {
    let h = 1e-3;
    let mut total = 0.0;
    let mut z: f64 = -10.0;
    while z <= 10.0 {
        let phi = (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
        let p: f64 = (0..sigmas.len()).filter(|&a| a != c).map(|a| normal_cdf(sigmas[c] * z / sigmas[a])).product();
        total += phi * p * h;
        z += h;
    }
    total
}

fn selection_frequencies(sigmas: &[f64], draws: usize) -> Vec<f64> {
    let e = constant_ensemble(sigmas);
    let picks = argmax_draws(&e, draws, 17).unwrap();
    let mut freq = vec![0.0; sigmas.len()];
    for p in picks {
        freq[p] += 1.0 / draws as f64;
    }
    freq
}

#[test]
fn discretization_selection_matches_brute_force() {
    let draws = 200_000;
    for sigmas in [vec![3.0, 1.0], vec![0.5, 1.0, 2.0], vec![1.0, 1.0, 1.0]] {
        let freq = selection_frequencies(&sigmas, draws);
        for (c, f) in freq.iter().enumerate() {
            let p = argmax_probability(&sigmas, c);
            let tol = 4.0 * (p * (1.0 - p) / draws as f64).sqrt();
            assert!((f - p).abs() <= tol, "sigmas {sigmas:?} c={c}: {f} vs {p}");
        }
    }
    // with two functions the argmax is symmetric whatever the scales
    assert!((argmax_probability(&[3.0, 1.0], 0) - 0.5).abs() < 1e-9);
}

#[test]
fn copula_correlation_matches_closed_form() {
    let cov = paper_covariance();
    let chol = cholesky(&cov).unwrap();
    let n = 200_000;
    let u = correlated_uniforms(n, &chol, &mut ChaCha8Rng::seed_from_u64(3));
    let d = cov.nrows();
    let mean = u.mean_axis(ndarray::Axis(0)).unwrap();
    let centered = &u - &mean;
    let sd: Vec<f64> = (0..d).map(|j| (centered.column(j).mapv(|v| v * v).sum() / n as f64).sqrt()).collect();
    for i in 0..d {
        for j in 0..i {
            let r = centered.column(i).dot(&centered.column(j)) / n as f64 / (sd[i] * sd[j]);
            let expected = 6.0 / PI * (cov[[i, j]] / 2.0).asin();
            assert!((r - expected).abs() < 0.01, "({i},{j}): {r} vs {expected}");
        }
    }
    // Kolmogorov-Smirnov against Uniform(-1, 1), 0.1% per column
    for j in 0..d {
        let mut col = u.column(j).to_vec();
        col.sort_by(f64::total_cmp);
        let ks = col
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let f = (v + 1.0) / 2.0;
                (f - k as f64 / n as f64).abs().max(((k + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 1.95 / (n as f64).sqrt(), "column {j}: KS {ks}");
        assert!(col[0] > -1.0 && col[n - 1] < 1.0);
    }
}

fn halton(index: u64, base: u64) -> f64 {
    let (mut f, mut r, mut i) = (1.0, 0.0, index);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

#[test]
fn lambda_oracle_matches_quasi_random_quadrature() {
    let primes = [2, 3, 5, 7, 11, 13, 17, 19];
    let points = 1_000_000u64;
    let mut sums = [0.0; 8];
    for i in 1..=points {
        let x: Vec<f64> = primes.iter().map(|&p| 2.0 * halton(i, p) - 1.0).collect();
        let g = regression_gradient(&x);
        for j in 0..8 {
            sums[j] += g[j] * g[j];
        }
    }
    for j in 0..8 {
        let quad = sums[j] / points as f64;
        let exact = true_lambda_oracle(j).unwrap();
        if exact == 0.0 {
            assert_eq!(quad, 0.0);
        } else {
            assert!(((quad - exact) / exact).abs() < 1e-4, "feature {j}: {quad} vs {exact}");
        }
    }
}

#[test]
fn noiseless_dgp_has_zero_residuals() {
    let (train_set, val, test) =
        generate_dgp(&DgpConfig { n_train: 300, n_val: 50, n_test: 50, noise_std: 0.0, ..DgpConfig::default() })
            .unwrap();
    for ds in [&train_set, &val, &test] {
        for (row, y) in ds.features().rows().into_iter().zip(ds.targets()) {
            assert_eq!(regression_function(row.as_slice().unwrap()), *y);
        }
    }
}

#[test]
fn noise_columns_uncorrelated_with_target() {
    let (train_set, _, _) =
        generate_dgp(&DgpConfig { n_train: 100_000, n_val: 10, n_test: 10, ..DgpConfig::default() }).unwrap();
    let aug = add_noise_features(&train_set, 2, 4).unwrap();
    let y = aug.targets();
    let ym = y.mean().unwrap();
    for j in 8..10 {
        let x = aug.features().column(j);
        let xm = x.mean().unwrap();
        let cov = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum::<f64>();
        let sx = x.iter().map(|a| (a - xm).powi(2)).sum::<f64>().sqrt();
        let sy = y.iter().map(|b| (b - ym).powi(2)).sum::<f64>().sqrt();
        assert!((cov / (sx * sy)).abs() < 0.02);
        assert!(x.iter().all(|v| *v > -1.0 && *v < 1.0));
    }
}

#[test]
fn ttest_recovers_linear_slope() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 2000;
    let x = Array2::from_shape_fn((n, 2), |_| rng.random_range(-1.0..1.0));
    let y = Array1::from_shape_fn(n, |i| 2.0 * x[[i, 0]] + 0.1 * rng.sample::<f64, _>(StandardNormal));
    let t = ttest_baseline(&Dataset::unnamed(x, y).unwrap(), 0.05).unwrap();
    assert!((t.coefficients[0] - 2.0).abs() < 0.02);
    assert!(t.rejections[0]);
    assert_eq!(t.degrees_of_freedom, n - 3);
}

fn synthetic(n: usize, seed: u64, f: impl Fn(f64, f64) -> f64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, 2), |_| rng.random_range(-1.0..1.0));
    let y = Array1::from_shape_fn(n, |i| f(x[[i, 0]], x[[i, 1]]));
    Dataset::unnamed(x, y).unwrap()
}

#[test]
fn constant_target_is_fit_closely() {
    let tr = synthetic(500, 1, |_, _| 3.5);
    let va = synthetic(100, 2, |_, _| 3.5);
    let fit = train(&tr, &va, &TrainConfig { hidden_units: 3, early_stop_min_delta: 0.0, ..TrainConfig::default() }).unwrap();
    let m = predict_mse(&fit.params, &va).unwrap();
    assert!(m < 1e-4, "{m}");
}

#[test]
fn single_sigmoid_target_is_learned() {
    let f = |a: f64, _| 1.0 / (1.0 + (-2.0 * a).exp());
    let tr = synthetic(4000, 1, f);
    let va = synthetic(500, 2, f);
    let fit = train(&tr, &va, &TrainConfig { hidden_units: 2, ..TrainConfig::default() }).unwrap();
    let m = predict_mse(&fit.params, &va).unwrap();
    assert!(m < 1e-4, "{m}");
}

#[test]
fn leave_one_out_sees_redundant_copies() {
    let make = |n, seed| {
        let base = synthetic(n, seed, |a, b| (2.0 * a).sin() + b);
        let dup = base.features().column(0).insert_axis(ndarray::Axis(1)).to_owned();
        base.with_extra_columns(dup, vec!["dup".to_string()]).unwrap()
    };
    let (tr, va, te) = (make(3000, 1), make(600, 2), make(600, 3));
    let cfg = TrainConfig { hidden_units: 8, max_epochs: 60, ..TrainConfig::default() };
    let loss = leave_one_out(&tr, &va, &te, &cfg).unwrap();
    assert!(loss[1] > 0.1, "{loss:?}");
    assert!(loss[0].abs() < 0.1 * loss[1] && loss[2].abs() < 0.1 * loss[1], "{loss:?}");
}

#[test]
fn full_covariance_uses_gram_factor() {
    let reference = array![[-1.0], [0.0], [1.0]];
    let f = |w: f64| NetworkParams::new(0.0, array![1.0], array![0.0], array![[w]]).unwrap();
    let e = RandomFunctionEnsemble::from_functions(vec![f(1.0), f(-1.0)], reference.view(), CovarianceMode::Full)
        .unwrap();
    let l = e.gram_factor.as_ref().unwrap();
    let gram = l.dot(&l.t());
    for a in 0..2 {
        assert!((gram[[a, a]] - e.second_moments[a]).abs() < 1e-8);
    }
}
