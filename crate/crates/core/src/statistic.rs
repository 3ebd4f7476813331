//! The gradient test statistic: the average squared partial derivative of
//! the fitted network with respect to each feature, under either the sample
//! law or an explicit uniform weight measure.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{ensure_same_width, Dataset};
use crate::error::{Error, Result};
use crate::nn::NetworkParams;
use crate::train::{predict_mse, train, TrainConfig};

/// Rows per accumulation block. Fixed so that sums do not depend on the
/// number of worker threads.
const BLOCK_ROWS: usize = 512;

/// Point budget for quasi-random integration when the dimension exceeds
/// [`MAX_GRID_DIMENSION`].
pub const QUASI_RANDOM_POINTS: usize = 1 << 16;

/// Largest dimension integrated on a full midpoint grid.
pub const MAX_GRID_DIMENSION: usize = 4;

/// Measure against which squared partial derivatives are averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightMeasure {
    /// The sample law of the feature rows.
    Empirical,
    /// Normalised Lebesgue measure on the box `[lower, upper]`.
    UniformHypercube {
        lower: Vec<f64>,
        upper: Vec<f64>,
        grid_points_per_dim: usize,
    },
    /// Uniform weight on the sub-box `[subset_lower, subset_upper]` of `[lower, upper]`.
    SubsetIndicator {
        lower: Vec<f64>,
        upper: Vec<f64>,
        subset_lower: Vec<f64>,
        subset_upper: Vec<f64>,
        grid_points_per_dim: usize,
    },
}

impl WeightMeasure {
    /// Integration box and resolution, after validation.
    fn integration_box(&self, d: usize) -> Result<(&[f64], &[f64], usize)> {
        let check_box = |lo: &[f64], hi: &[f64], what: &str| -> Result<()> {
            if lo.len() != d || hi.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "weight measure bounds",
                    expected: d,
                    found: lo.len().min(hi.len()),
                });
            }
            if lo.iter().chain(hi).any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{what} is unbounded")));
            }
            if lo.iter().zip(hi).any(|(l, h)| l >= h) {
                return Err(Error::InvalidConfig(format!("{what} has zero volume")));
            }
            Ok(())
        };
        let check_grid = |g: usize| -> Result<()> {
            if g < 2 {
                return Err(Error::InvalidConfig("grid_points_per_dim must be at least 2".into()));
            }
            Ok(())
        };
        match self {
            WeightMeasure::Empirical => Err(Error::InvalidConfig(
                "empirical measure has no integration region; use empirical_statistic".into(),
            )),
            WeightMeasure::UniformHypercube { lower, upper, grid_points_per_dim } => {
                check_box(lower, upper, "region")?;
                check_grid(*grid_points_per_dim)?;
                Ok((lower, upper, *grid_points_per_dim))
            }
            WeightMeasure::SubsetIndicator { lower, upper, subset_lower, subset_upper, grid_points_per_dim } => {
                check_box(lower, upper, "region")?;
                check_box(subset_lower, subset_upper, "subset")?;
                check_grid(*grid_points_per_dim)?;
                let inside = subset_lower.iter().zip(lower).all(|(s, l)| s >= l)
                    && subset_upper.iter().zip(upper).all(|(s, u)| s <= u);
                if !inside {
                    return Err(Error::InvalidConfig("subset must lie inside the region".into()));
                }
                Ok((subset_lower, subset_upper, *grid_points_per_dim))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStatistics {
    pub values: Vec<f64>,
    pub measure: WeightMeasure,
    /// Rows (empirical) or integration nodes (explicit measure) used.
    pub n_used: usize,
}

/// Sum over rows of squared input gradients, blocked for reproducible parallel sums.
fn squared_gradient_sum(params: &NetworkParams, points: ArrayView2<'_, f64>) -> Vec<f64> {
    let d = params.inputs();
    let n = points.nrows();
    let blocks: Vec<Vec<f64>> = (0..n.div_ceil(BLOCK_ROWS))
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![0.0; d];
            let mut grad = vec![0.0; d];
            let mut buf = vec![0.0; d];
            for i in b * BLOCK_ROWS..((b + 1) * BLOCK_ROWS).min(n) {
                let row = points.row(i);
                let x = match row.as_slice() {
                    Some(s) => s,
                    None => {
                        buf.iter_mut().zip(row.iter()).for_each(|(o, v)| *o = *v);
                        &buf[..]
                    }
                };
                params.gradient_into(x, &mut grad);
                for (a, g) in acc.iter_mut().zip(&grad) {
                    *a += g * g;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; d];
    for block in &blocks {
        for (t, v) in total.iter_mut().zip(block) {
            *t += v;
        }
    }
    total
}

/// `(1/n) Σ_i (∂f/∂x_j (X_i))²` for every feature `j`.
pub fn empirical_statistic(params: &NetworkParams, features: ArrayView2<'_, f64>) -> Result<FeatureStatistics> {
    let (n, d) = features.dim();
    if n == 0 {
        return Err(Error::Empty("feature matrix has no rows"));
    }
    if d != params.inputs() {
        return Err(Error::DimensionMismatch { context: "statistic features", expected: params.inputs(), found: d });
    }
    let values = squared_gradient_sum(params, features).into_iter().map(|s| s / n as f64).collect();
    Ok(FeatureStatistics { values, measure: WeightMeasure::Empirical, n_used: n })
}

/// Integral of the squared partial derivatives against an explicit uniform measure.
///
/// Up to [`MAX_GRID_DIMENSION`] inputs the integral uses a midpoint tensor
/// grid; above that, [`QUASI_RANDOM_POINTS`] Halton points.
pub fn weighted_statistic(params: &NetworkParams, measure: &WeightMeasure) -> Result<FeatureStatistics> {
    let d = params.inputs();
    let (lo, hi, g) = measure.integration_box(d)?;
    let nodes = if d <= MAX_GRID_DIMENSION {
        midpoint_grid(lo, hi, g)
    } else {
        halton_points(lo, hi, QUASI_RANDOM_POINTS)
    };
    let n = nodes.nrows();
    let values = squared_gradient_sum(params, nodes.view()).into_iter().map(|s| s / n as f64).collect();
    Ok(FeatureStatistics { values, measure: measure.clone(), n_used: n })
}

fn midpoint_grid(lo: &[f64], hi: &[f64], g: usize) -> Array2<f64> {
    let d = lo.len();
    let total = g.pow(d as u32);
    Array2::from_shape_fn((total, d), |(i, j)| {
        let idx = (i / g.pow(j as u32)) % g;
        lo[j] + (hi[j] - lo[j]) * (idx as f64 + 0.5) / g as f64
    })
}

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103,
    107, 109, 113, 127, 131,
];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

fn nth_prime(j: usize) -> u64 {
    if j < PRIMES.len() {
        return PRIMES[j];
    }
    let mut count = PRIMES.len();
    let mut c = PRIMES[PRIMES.len() - 1] + 2;
    loop {
        if (2..).take_while(|p| p * p <= c).all(|p| !c.is_multiple_of(p)) {
            if count == j {
                return c;
            }
            count += 1;
        }
        c += 2;
    }
}

/// Halton sequence scaled onto the box, skipping the origin point.
fn halton_points(lo: &[f64], hi: &[f64], n: usize) -> Array2<f64> {
    let bases: Vec<u64> = (0..lo.len()).map(nth_prime).collect();
    Array2::from_shape_fn((n, lo.len()), |(i, j)| lo[j] + (hi[j] - lo[j]) * radical_inverse(i as u64 + 1, bases[j]))
}

/// Feature indices by descending statistic; ties keep ascending index order.
pub fn rank_features(stats: &FeatureStatistics) -> Vec<usize> {
    let mut order: Vec<usize> = (0..stats.values.len()).collect();
    order.sort_by(|&a, &b| stats.values[b].total_cmp(&stats.values[a]).then(a.cmp(&b)));
    order
}

/// Increase in test MSE when each feature is dropped and the model refit.
///
/// Runs `d + 1` fits with the same configuration; entry `j` is
/// `MSE(without j) − MSE(all features)`.
pub fn leave_one_out(train_set: &Dataset, val: &Dataset, test: &Dataset, config: &TrainConfig) -> Result<Vec<f64>> {
    let d = train_set.n_features();
    if d < 2 {
        return Err(Error::InvalidConfig("leave-one-out needs at least two features".into()));
    }
    ensure_same_width(train_set, val, "validation features")?;
    ensure_same_width(train_set, test, "test features")?;
    let losses: Vec<f64> = (0..=d)
        .into_par_iter()
        .map(|drop| -> Result<f64> {
            if drop == d {
                let fit = train(train_set, val, config)?;
                predict_mse(&fit.params, test)
            } else {
                let fit = train(&train_set.without_column(drop)?, &val.without_column(drop)?, config)?;
                predict_mse(&fit.params, &test.without_column(drop)?)
            }
        })
        .collect::<Result<_>>()?;
    let full = losses[d];
    Ok(losses[..d].iter().map(|l| l - full).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    fn stats(values: Vec<f64>) -> FeatureStatistics {
        FeatureStatistics { values, measure: WeightMeasure::Empirical, n_used: 1 }
    }

    fn one_unit(b1: f64, a: Vec<f64>) -> NetworkParams {
        let d = a.len();
        NetworkParams::new(0.0, array![b1], array![0.0], Array2::from_shape_vec((1, d), a).unwrap()).unwrap()
    }

    #[test]
    fn ranking_follows_values_with_index_tiebreak() {
        let table = stats(vec![1.31, 0.332, 0.331, 0.267, 0.480, 0.479, 0.0101, 4.2e-6]);
        assert_eq!(rank_features(&table), vec![0, 4, 5, 1, 2, 3, 6, 7]);
        assert_eq!(rank_features(&stats(vec![2.0; 4])), vec![0, 1, 2, 3]);
        assert_eq!(rank_features(&stats(vec![0.0, 5.0])), vec![1, 0]);
    }

    #[test]
    fn zero_output_weights_give_zero_statistics() {
        let p = one_unit(0.0, vec![1.0, -2.0]);
        let x = array![[0.1, 0.2], [0.3, -0.4]];
        assert_eq!(empirical_statistic(&p, x.view()).unwrap().values, vec![0.0, 0.0]);
        let m = WeightMeasure::UniformHypercube { lower: vec![-1.0; 2], upper: vec![1.0; 2], grid_points_per_dim: 4 };
        assert_eq!(weighted_statistic(&p, &m).unwrap().values, vec![0.0, 0.0]);
    }

    #[test]
    fn three_row_hand_average() {
        let p = one_unit(2.0, vec![1.0, 0.5]);
        let rows = [[0.0, 0.0], [1.0, -1.0], [-0.5, 2.0]];
        let x = Array2::from_shape_vec((3, 2), rows.concat()).unwrap();
        let got = empirical_statistic(&p, x.view()).unwrap();
        let mut want = [0.0; 2];
        for r in rows {
            let z = r[0] + 0.5 * r[1];
            let s = 1.0 / (1.0 + (-z).exp());
            let dz = 2.0 * s * (1.0 - s);
            want[0] += (dz * 1.0).powi(2) / 3.0;
            want[1] += (dz * 0.5).powi(2) / 3.0;
        }
        for j in 0..2 {
            assert!((got.values[j] - want[j]).abs() < 1e-15);
        }
        assert_eq!(got.n_used, 3);
    }

    #[test]
    fn empirical_errors() {
        let p = one_unit(1.0, vec![1.0, 1.0]);
        assert!(matches!(empirical_statistic(&p, Array2::zeros((0, 2)).view()), Err(Error::Empty(_))));
        assert!(matches!(
            empirical_statistic(&p, Array2::zeros((2, 3)).view()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sigmoid_on_symmetric_interval() {
        // f = σ(x) on U[-1, 1]; oracle: composite Simpson with 20001 nodes
        let p = one_unit(1.0, vec![1.0]);
        let m = WeightMeasure::UniformHypercube { lower: vec![-1.0], upper: vec![1.0], grid_points_per_dim: 4000 };
        let got = weighted_statistic(&p, &m).unwrap().values[0];
        let n = 20_000;
        let h = 2.0 / n as f64;
        let f = |x: f64| {
            let s = 1.0 / (1.0 + (-x).exp());
            (s * (1.0 - s)).powi(2)
        };
        let mut simpson = f(-1.0) + f(1.0);
        for i in 1..n {
            simpson += f(-1.0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = 0.5 * simpson * h / 3.0;
        assert!((oracle - 0.053_652_721_050_49).abs() < 1e-12, "{oracle}");
        assert!((got - oracle).abs() < 1e-8);
    }

    #[test]
    fn subset_measure_restricts_region() {
        // linear-in-x1 region of σ: compare against a direct grid on the subset
        let p = one_unit(1.0, vec![1.0]);
        let sub = WeightMeasure::SubsetIndicator {
            lower: vec![-3.0],
            upper: vec![3.0],
            subset_lower: vec![0.0],
            subset_upper: vec![1.0],
            grid_points_per_dim: 1000,
        };
        let box_only = WeightMeasure::UniformHypercube { lower: vec![0.0], upper: vec![1.0], grid_points_per_dim: 1000 };
        assert_eq!(weighted_statistic(&p, &sub).unwrap().values, weighted_statistic(&p, &box_only).unwrap().values);
    }

    #[test]
    fn measure_validation() {
        let p = one_unit(1.0, vec![1.0]);
        let unbounded =
            WeightMeasure::UniformHypercube { lower: vec![f64::NEG_INFINITY], upper: vec![1.0], grid_points_per_dim: 4 };
        assert!(matches!(weighted_statistic(&p, &unbounded), Err(Error::InvalidConfig(m)) if m.contains("unbounded")));
        let flat = WeightMeasure::SubsetIndicator {
            lower: vec![-1.0],
            upper: vec![1.0],
            subset_lower: vec![0.5],
            subset_upper: vec![0.5],
            grid_points_per_dim: 4,
        };
        assert!(matches!(weighted_statistic(&p, &flat), Err(Error::InvalidConfig(m)) if m.contains("zero volume")));
        assert!(weighted_statistic(&p, &WeightMeasure::Empirical).is_err());
        let coarse = WeightMeasure::UniformHypercube { lower: vec![0.0], upper: vec![1.0], grid_points_per_dim: 1 };
        assert!(weighted_statistic(&p, &coarse).is_err());
    }

    #[test]
    fn high_dimension_uses_quasi_random_nodes() {
        let p = one_unit(1.0, vec![0.1; 6]);
        let m = WeightMeasure::UniformHypercube { lower: vec![0.0; 6], upper: vec![1.0; 6], grid_points_per_dim: 3 };
        let s = weighted_statistic(&p, &m).unwrap();
        assert_eq!(s.n_used, QUASI_RANDOM_POINTS);
        assert!(s.values.iter().all(|v| *v > 0.0));
        assert_eq!(nth_prime(32), 137);
    }

    #[test]
    fn leave_one_out_needs_two_features() {
        let ds = Dataset::unnamed(Array2::zeros((4, 1)), Array1::zeros(4)).unwrap();
        assert!(matches!(
            leave_one_out(&ds, &ds, &ds, &TrainConfig::default()),
            Err(Error::InvalidConfig(_))
        ));
    }
}
