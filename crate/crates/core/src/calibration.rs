//! Scale calibration from injected noise features.
//!
//! Pure-noise columns are added before fitting. Their statistics follow the
//! null distribution at the unknown scale, so the largest of them divided by
//! the mean of scale-one ("unscaled") samples gives the factor applied to the
//! unscaled quantile.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::substream;

pub const DEFAULT_NOISE_FEATURES: usize = 3;
pub const NOISE_SUFFIX: &str = "_noise";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub b_squared: f64,
    pub noise_statistics: Vec<f64>,
    pub unscaled_sample_mean: f64,
    pub noise_feature_count: usize,
}

/// Appends `count` columns of i.i.d. Uniform(−1, 1) noise named `n{k}_noise`.
pub fn add_noise_features(data: &Dataset, count: usize, seed: u64) -> Result<Dataset> {
    if count == 0 {
        return Err(Error::InvalidConfig("noise feature count must be positive".into()));
    }
    let mut rng = substream(seed, 0);
    let noise = Array2::from_shape_simple_fn((data.n_rows(), count), || rng.random_range(-1.0..1.0));
    let names = (1..=count).map(|k| format!("n{k}{NOISE_SUFFIX}")).collect();
    data.with_extra_columns(noise, names)
}

/// `B² = max(noise statistics) / mean(unscaled samples)`.
pub fn estimate_scale(noise_statistics: &[f64], unscaled_samples: &[f64]) -> Result<CalibrationResult> {
    if noise_statistics.is_empty() {
        return Err(Error::Empty("noise statistics"));
    }
    if unscaled_samples.is_empty() {
        return Err(Error::Empty("unscaled samples"));
    }
    let mean = unscaled_samples.iter().sum::<f64>() / unscaled_samples.len() as f64;
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::Degenerate(format!("unscaled samples have mean {mean}")));
    }
    let max = noise_statistics.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(CalibrationResult {
        b_squared: max / mean,
        noise_statistics: noise_statistics.to_vec(),
        unscaled_sample_mean: mean,
        noise_feature_count: noise_statistics.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rule_arithmetic() {
        let c = estimate_scale(&[2.0, 4.0], &[1.0, 3.0]).unwrap();
        assert_eq!(c.b_squared, 2.0);
        assert_eq!(c.unscaled_sample_mean, 2.0);
        assert_eq!(c.noise_feature_count, 2);
        assert_eq!(estimate_scale(&[0.0, 0.0], &[1.0]).unwrap().b_squared, 0.0);
    }

    #[test]
    fn degenerate_and_empty_inputs() {
        assert!(matches!(estimate_scale(&[1.0], &[0.0, 0.0]), Err(Error::Degenerate(_))));
        assert!(estimate_scale(&[], &[1.0]).is_err());
        assert!(estimate_scale(&[1.0], &[]).is_err());
    }

    #[test]
    fn noise_columns_are_appended_deterministically() {
        let ds = Dataset::unnamed(array![[1.0], [2.0], [3.0], [4.0]], array![0.0, 1.0, 2.0, 3.0]).unwrap();
        let a = add_noise_features(&ds, 1, 5).unwrap();
        assert_eq!(a.n_features(), 2);
        assert_eq!(a.column_names()[1], "n1_noise");
        assert!(a.features().column(1).iter().all(|v| *v > -1.0 && *v < 1.0));
        assert_eq!(a, add_noise_features(&ds, 1, 5).unwrap());
        assert_eq!(a.targets(), ds.targets());
        assert!(add_noise_features(&ds, 0, 5).is_err());
    }
}
