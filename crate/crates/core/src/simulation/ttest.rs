//! Ordinary least squares with intercept and per-coefficient t-tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Relative eigenvalue floor of `ZᵀZ` below which the design counts as rank deficient.
const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsTest {
    pub intercept: f64,
    /// One entry per feature (intercept excluded).
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub rejections: Vec<bool>,
    pub degrees_of_freedom: usize,
    pub residual_variance: f64,
}

/// Fits `y = β₀ + Xβ + e` and tests every `β_j = 0` two-sided at `level`.
pub fn ttest_baseline(train: &Dataset, level: f64) -> Result<OlsTest> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(format!("test level {level} outside (0, 1)")));
    }
    let (n, d) = train.features().dim();
    let p = d + 1;
    if n <= p {
        return Err(Error::InvalidConfig(format!("t-test needs more than {p} rows, got {n}")));
    }
    let x = train.features();
    let y = train.targets();

    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut xty = DVector::<f64>::zeros(p);
    let mut z = vec![1.0; p];
    for (i, row) in x.rows().into_iter().enumerate() {
        for j in 0..d {
            z[j + 1] = row[j];
        }
        for a in 0..p {
            xty[a] += z[a] * y[i];
            for b in 0..=a {
                gram[(a, b)] += z[a] * z[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[(b, a)] = gram[(a, b)];
        }
    }
    let eig = gram.clone().symmetric_eigenvalues();
    let max = eig.iter().copied().fold(0.0, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= RANK_TOLERANCE * max {
        return Err(Error::RankDeficient);
    }
    let chol = gram.cholesky().ok_or(Error::RankDeficient)?;
    let beta = chol.solve(&xty);
    let inv = chol.inverse();

    let mut rss = 0.0;
    for (i, row) in x.rows().into_iter().enumerate() {
        let fitted = beta[0] + (0..d).map(|j| beta[j + 1] * row[j]).sum::<f64>();
        rss += (y[i] - fitted).powi(2);
    }
    let df = n - p;
    let sigma2 = rss / df as f64;
    let t_dist = StudentsT::new(0.0, 1.0, df as f64).map_err(|e| Error::Degenerate(e.to_string()))?;

    let mut out = OlsTest {
        intercept: beta[0],
        coefficients: Vec::with_capacity(d),
        std_errors: Vec::with_capacity(d),
        t_values: Vec::with_capacity(d),
        p_values: Vec::with_capacity(d),
        rejections: Vec::with_capacity(d),
        degrees_of_freedom: df,
        residual_variance: sigma2,
    };
    for j in 1..p {
        let se = (sigma2 * inv[(j, j)]).sqrt();
        let t = beta[j] / se;
        let pv = if t.is_finite() { (2.0 * t_dist.sf(t.abs())).min(1.0) } else { 0.0 };
        out.coefficients.push(beta[j]);
        out.std_errors.push(se);
        out.t_values.push(t);
        out.p_values.push(pv);
        out.rejections.push(pv < level);
    }
    Ok(out)
}
