//! Discretised Gaussian-process argmax over an ensemble of random networks.
//!
//! Each sample draws `g_c ~ N(0, σ_c²)` for every ensemble member, picks the
//! argmax `c*` and emits the statistic of network `c*` for the target
//! feature. The default covariance is diagonal with `σ_c² = (1/n) Σ f_c(X_i)²`;
//! [`CovarianceMode::Full`] uses the whole Gram matrix `E[f_a f_b]`.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::NetworkParams;
use crate::rng::substream;

/// Diagonal jitter added before factorising the full Gram matrix.
pub const GRAM_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceMode {
    #[default]
    Diagonal,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomFunctionEnsemble {
    pub functions: Vec<NetworkParams>,
    pub second_moments: Vec<f64>,
    /// C × d matrix of empirical statistics.
    pub statistic_per_function: Array2<f64>,
    /// Lower Cholesky factor of the Gram matrix, present in full-covariance mode.
    pub gram_factor: Option<Array2<f64>>,
}

impl RandomFunctionEnsemble {
    /// Evaluates given networks on the reference sample.
    pub fn from_functions(
        functions: Vec<NetworkParams>,
        reference: ArrayView2<'_, f64>,
        mode: CovarianceMode,
    ) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::InvalidConfig("ensemble needs at least one function".into()));
        }
        let (n, d) = reference.dim();
        if n == 0 {
            return Err(Error::Empty("ensemble reference features"));
        }
        let rows: Vec<(Vec<f64>, Vec<f64>)> = functions
            .par_iter()
            .map(|f| {
                if f.inputs() != d {
                    return Err(Error::DimensionMismatch {
                        context: "ensemble reference features",
                        expected: f.inputs(),
                        found: d,
                    });
                }
                let mut sq = vec![0.0; d];
                let mut grad = vec![0.0; d];
                let mut outputs = Vec::with_capacity(n);
                for r in reference.rows() {
                    let owned;
                    let x = match r.as_slice() {
                        Some(s) => s,
                        None => {
                            owned = r.to_vec();
                            &owned[..]
                        }
                    };
                    outputs.push(f.eval_with_gradient(x, &mut grad));
                    for (s, g) in sq.iter_mut().zip(&grad) {
                        *s += g * g;
                    }
                }
                let stats = sq.into_iter().map(|s| s / n as f64).collect();
                Ok((stats, outputs))
            })
            .collect::<Result<_>>()?;
        let c = functions.len();
        let mut statistic_per_function = Array2::zeros((c, d));
        let mut second_moments = Vec::with_capacity(c);
        for (i, (stats, outputs)) in rows.iter().enumerate() {
            statistic_per_function.row_mut(i).assign(&ndarray::ArrayView1::from(stats.as_slice()));
            second_moments.push(outputs.iter().map(|v| v * v).sum::<f64>() / n as f64);
        }
        let gram_factor = match mode {
            CovarianceMode::Diagonal => None,
            CovarianceMode::Full => {
                let gram = DMatrix::from_fn(c, c, |a, b| {
                    let s: f64 = rows[a].1.iter().zip(&rows[b].1).map(|(x, y)| x * y).sum();
                    s / n as f64 + if a == b { GRAM_JITTER } else { 0.0 }
                });
                let l = gram.cholesky().ok_or(Error::NotPositiveDefinite)?.l();
                Some(Array2::from_shape_fn((c, c), |(a, b)| l[(a, b)]))
            }
        };
        Ok(Self { functions, second_moments, statistic_per_function, gram_factor })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.statistic_per_function.ncols()
    }
}

/// Draws `count` Glorot-normal networks with `hidden_units` units and
/// evaluates them on `reference_features`. Network `c` uses stream `c` of `seed`.
pub fn build_ensemble(
    hidden_units: usize,
    count: usize,
    reference_features: ArrayView2<'_, f64>,
    seed: u64,
    mode: CovarianceMode,
) -> Result<RandomFunctionEnsemble> {
    if count == 0 {
        return Err(Error::InvalidConfig("ensemble size must be positive".into()));
    }
    if hidden_units == 0 {
        return Err(Error::InvalidConfig("hidden_units must be positive".into()));
    }
    if reference_features.nrows() == 0 || reference_features.ncols() == 0 {
        return Err(Error::Empty("ensemble reference features"));
    }
    let d = reference_features.ncols();
    let functions = (0..count)
        .map(|c| NetworkParams::random_glorot(hidden_units, d, &mut substream(seed, c as u64)))
        .collect();
    RandomFunctionEnsemble::from_functions(functions, reference_features, mode)
}

/// Argmax index for each of `sample_count` Gaussian draws.
pub fn argmax_draws(ensemble: &RandomFunctionEnsemble, sample_count: usize, seed: u64) -> Result<Vec<usize>> {
    if sample_count == 0 {
        return Err(Error::InvalidConfig("sample_count must be positive".into()));
    }
    if ensemble.is_empty() {
        return Err(Error::InvalidConfig("ensemble is empty".into()));
    }
    let c = ensemble.len();
    let sds: Vec<f64> = ensemble.second_moments.iter().map(|v| v.sqrt()).collect();
    Ok((0..sample_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let z: Vec<f64> = (0..c).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut best = 0;
            let mut best_val = f64::NEG_INFINITY;
            for a in 0..c {
                let g = match &ensemble.gram_factor {
                    None => sds[a] * z[a],
                    Some(l) => (0..=a).map(|b| l[[a, b]] * z[b]).sum(),
                };
                if g > best_val {
                    best_val = g;
                    best = a;
                }
            }
            best
        })
        .collect())
}

/// Samples of the limiting statistic for `target_feature`.
pub fn sample_discretization_distribution(
    ensemble: &RandomFunctionEnsemble,
    target_feature: usize,
    sample_count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if target_feature >= ensemble.dimension() {
        return Err(Error::DimensionMismatch {
            context: "discretization target feature",
            expected: ensemble.dimension(),
            found: target_feature,
        });
    }
    let picks = argmax_draws(ensemble, sample_count, seed)?;
    Ok(picks.into_iter().map(|c| ensemble.statistic_per_function[[c, target_feature]]).collect())
}

/// Samples for every feature at once (column `j` = feature `j`), sharing the
/// argmax draws. Column `j` equals [`sample_discretization_distribution`] for `j`.
pub fn sample_discretization_all(
    ensemble: &RandomFunctionEnsemble,
    sample_count: usize,
    seed: u64,
) -> Result<Array2<f64>> {
    let picks = argmax_draws(ensemble, sample_count, seed)?;
    let d = ensemble.dimension();
    Ok(Array2::from_shape_fn((sample_count, d), |(i, j)| ensemble.statistic_per_function[[picks[i], j]]))
}
