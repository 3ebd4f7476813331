//! The eight-feature benchmark data-generating process
//! `Y = 8 + X1² + X2·X3 + cos X4 + exp(X5·X6) + 0.1·X7 + ε`, X8 irrelevant.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{default_names, Dataset};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::simulation::copula::{cholesky, correlated_uniforms};

pub const DGP_FEATURES: usize = 8;

/// Correlation matrix used for the copula experiment: pairs (X1,X2)=0.1,
/// (X5,X6)=0.5 and (X4,X7)=0.3.
pub fn paper_covariance() -> Array2<f64> {
    let mut s = Array2::eye(DGP_FEATURES);
    for &(i, j, r) in &[(0, 1, 0.1), (4, 5, 0.5), (3, 6, 0.3)] {
        s[[i, j]] = r;
        s[[j, i]] = r;
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub noise_std: f64,
    pub correlated: bool,
    pub covariance: Array2<f64>,
    pub seed: u64,
}

impl Default for DgpConfig {
    fn default() -> Self {
        Self {
            n_train: 100_000,
            n_val: 10_000,
            n_test: 10_000,
            noise_std: 0.01,
            correlated: false,
            covariance: paper_covariance(),
            seed: 0,
        }
    }
}

impl DgpConfig {
    /// Desk-scale sizes: 20,000 training rows, 4,000 validation and test rows.
    pub fn desk_scale(seed: u64) -> Self {
        Self { n_train: 20_000, n_val: 4_000, n_test: 4_000, seed, ..Self::default() }
    }
}

/// Regression function without noise.
pub fn regression_function(x: &[f64]) -> f64 {
    8.0 + x[0] * x[0] + x[1] * x[2] + x[3].cos() + (x[4] * x[5]).exp() + 0.1 * x[6]
}

/// Analytic partial derivatives of [`regression_function`].
pub fn regression_gradient(x: &[f64]) -> [f64; DGP_FEATURES] {
    let e = (x[4] * x[5]).exp();
    [2.0 * x[0], x[2], x[1], -x[3].sin(), x[5] * e, x[4] * e, 0.1, 0.0]
}

fn uniform_features<R: Rng>(n: usize, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, DGP_FEATURES), || rng.random_range(-1.0..1.0))
}

fn make_split(config: &DgpConfig, n: usize, split: u64, chol: Option<&Array2<f64>>) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidConfig("split sizes must be positive".into()));
    }
    let mut rng = substream(config.seed, split);
    let x = match chol {
        Some(l) => correlated_uniforms(n, l, &mut rng),
        None => uniform_features(n, &mut rng),
    };
    let noise = Normal::new(0.0, config.noise_std)
        .map_err(|_| Error::InvalidConfig("noise_std must be finite and non-negative".into()))?;
    let y: Array1<f64> = x
        .rows()
        .into_iter()
        .map(|row| regression_function(row.as_slice().expect("standard layout")) + noise.sample(&mut rng))
        .collect();
    Dataset::new(x, y, default_names(DGP_FEATURES).into_iter().map(|s| s.replace('x', "X")).collect())
}

/// Draws independent train / validation / test splits.
pub fn generate_dgp(config: &DgpConfig) -> Result<(Dataset, Dataset, Dataset)> {
    if !(config.noise_std >= 0.0) {
        return Err(Error::InvalidConfig("noise_std must be non-negative".into()));
    }
    let chol = if config.correlated {
        Some(cholesky(&config.covariance)?)
    } else {
        None
    };
    let chol = chol.as_ref();
    Ok((
        make_split(config, config.n_train, 0, chol)?,
        make_split(config, config.n_val, 1, chol)?,
        make_split(config, config.n_test, 2, chol)?,
    ))
}
