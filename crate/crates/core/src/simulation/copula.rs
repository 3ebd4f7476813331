//! Gaussian copula with Uniform(−1, 1) marginals.

use nalgebra::DMatrix;
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Standard normal distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Lower Cholesky factor of a symmetric positive-definite correlation matrix.
pub fn cholesky(cov: &Array2<f64>) -> Result<Array2<f64>> {
    let (r, c) = cov.dim();
    if r != c || r == 0 {
        return Err(Error::DimensionMismatch { context: "covariance matrix", expected: r, found: c });
    }
    for i in 0..r {
        if (cov[[i, i]] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig("covariance must have unit diagonal".into()));
        }
        for j in 0..i {
            if (cov[[i, j]] - cov[[j, i]]).abs() > 1e-12 {
                return Err(Error::InvalidConfig("covariance must be symmetric".into()));
            }
        }
    }
    let m = DMatrix::from_fn(r, r, |i, j| cov[[i, j]]);
    let l = m.cholesky().ok_or(Error::NotPositiveDefinite)?.l();
    Ok(Array2::from_shape_fn((r, r), |(i, j)| l[(i, j)]))
}

/// Draws `n` rows `2Φ(L z) − 1` with z standard normal.
pub fn correlated_uniforms<R: Rng + ?Sized>(n: usize, chol: &Array2<f64>, rng: &mut R) -> Array2<f64> {
    let d = chol.nrows();
    let mut out = Array2::zeros((n, d));
    let mut z = vec![0.0; d];
    for mut row in out.rows_mut() {
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += chol[[i, j]] * z[j];
            }
            row[i] = 2.0 * normal_cdf(acc) - 1.0;
        }
    }
    out
}

/// Samples correlated Uniform(−1, 1) features through a Gaussian copula.
pub fn generate_correlated_features<R: Rng + ?Sized>(
    n: usize,
    covariance: &Array2<f64>,
    rng: &mut R,
) -> Result<Array2<f64>> {
    let l = cholesky(covariance)?;
    Ok(correlated_uniforms(n, &l, rng))
}
