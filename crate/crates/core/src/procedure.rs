//! The complete test for a fitted network: statistics, null samples,
//! noise-feature calibration, quantiles and decisions.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    build_ensemble, empirical_quantile, reject_null, sample_discretization_all, sample_series_distribution,
    CovarianceMode, FourierWeightTable, QuantileEstimate, QuantileMethod, SeriesSamplerConfig,
};
use crate::calibration::{estimate_scale, CalibrationResult};
use crate::error::{Error, Result};
use crate::nn::NetworkParams;
use crate::rng::derive_seed;
use crate::statistic::{empirical_statistic, rank_features, FeatureStatistics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    /// Truncation order `N` of the Fourier index set.
    pub truncation: usize,
    pub sample_count: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self { truncation: 4, sample_count: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationOptions {
    /// Number of random networks `C`.
    pub functions: usize,
    pub sample_count: usize,
    /// Cap on the rows used to evaluate the random networks.
    pub reference_rows: usize,
    pub covariance: CovarianceMode,
}

impl Default for DiscretizationOptions {
    fn default() -> Self {
        Self { functions: 500, sample_count: 10_000, reference_rows: 5_000, covariance: CovarianceMode::Diagonal }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOptions {
    /// Test level α; quantiles are taken at 1 − α.
    pub level: f64,
    pub series: SeriesOptions,
    pub discretization: DiscretizationOptions,
    /// Skip noise calibration and use this scale instead.
    pub fixed_b_squared: Option<f64>,
    pub seed: u64,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            level: 0.05,
            series: SeriesOptions::default(),
            discretization: DiscretizationOptions::default(),
            fixed_b_squared: None,
            seed: 0,
        }
    }
}

impl TestOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidConfig(format!("test level {} outside (0, 1)", self.level)));
        }
        if self.series.truncation == 0 || self.series.sample_count == 0 {
            return Err(Error::InvalidConfig("series truncation and sample count must be positive".into()));
        }
        let disc = &self.discretization;
        if disc.functions == 0 || disc.sample_count == 0 || disc.reference_rows == 0 {
            return Err(Error::InvalidConfig("discretization sizes must be positive".into()));
        }
        if let Some(b2) = self.fixed_b_squared {
            if !(b2 >= 0.0 && b2.is_finite()) {
                return Err(Error::InvalidConfig("fixed B² must be finite and non-negative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDecision {
    pub name: String,
    /// Column index in the fitted network's input.
    pub column: usize,
    pub statistic: f64,
    pub quantile: QuantileEstimate,
    pub rejected: bool,
    /// 1-based rank by descending statistic among tested features.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub method: QuantileMethod,
    pub level: f64,
    pub statistics: FeatureStatistics,
    pub calibration: Option<CalibrationResult>,
    /// Applied scale (calibrated or fixed).
    pub b_squared: f64,
    pub decisions: Vec<FeatureDecision>,
}

impl TestOutcome {
    pub fn rejections(&self) -> Vec<bool> {
        self.decisions.iter().map(|d| d.rejected).collect()
    }
}

/// Evenly spaced subset of at most `cap` rows.
pub fn strided_rows(x: ArrayView2<'_, f64>, cap: usize) -> Array2<f64> {
    let n = x.nrows();
    if n <= cap {
        return x.to_owned();
    }
    let rows: Vec<usize> = (0..cap).map(|i| i * n / cap).collect();
    x.select(Axis(0), &rows)
}

/// Unscaled (B = 1) null samples, one column per network input.
pub fn unscaled_null_samples(
    params: &NetworkParams,
    reference: ArrayView2<'_, f64>,
    method: QuantileMethod,
    options: &TestOptions,
) -> Result<Array2<f64>> {
    let d = params.inputs();
    match method {
        QuantileMethod::Series => {
            let config = SeriesSamplerConfig {
                table: FourierWeightTable::new(d, options.series.truncation)?,
                target_feature: 0,
                scale_b_squared: 1.0,
                sample_count: options.series.sample_count,
                seed: derive_seed(options.seed, 1),
            };
            // the series law is the same for every coordinate
            let column = Array1::from(sample_series_distribution(&config)?);
            let m = column.len();
            Ok(column.insert_axis(Axis(1)).broadcast((m, d)).expect("broadcast column").to_owned())
        }
        QuantileMethod::Discretization => {
            let disc = &options.discretization;
            let reference = strided_rows(reference, disc.reference_rows);
            let ensemble = build_ensemble(
                params.hidden_units(),
                disc.functions,
                reference.view(),
                derive_seed(options.seed, 2),
                disc.covariance,
            )?;
            sample_discretization_all(&ensemble, disc.sample_count, derive_seed(options.seed, 3))
        }
    }
}

/// Runs the test on every non-noise column of `params`' input.
///
/// `statistic_rows` are the rows averaged in the statistic, `reference_rows`
/// the rows on which random networks are evaluated. `noise_columns` lists the
/// injected noise inputs used for calibration; they are not tested.
pub fn significance_test(
    params: &NetworkParams,
    statistic_rows: ArrayView2<'_, f64>,
    reference_rows: ArrayView2<'_, f64>,
    column_names: &[String],
    noise_columns: &[usize],
    method: QuantileMethod,
    options: &TestOptions,
) -> Result<TestOutcome> {
    options.validate()?;
    let d = params.inputs();
    if column_names.len() != d {
        return Err(Error::DimensionMismatch { context: "column names", expected: d, found: column_names.len() });
    }
    if reference_rows.ncols() != d {
        return Err(Error::DimensionMismatch { context: "reference rows", expected: d, found: reference_rows.ncols() });
    }
    if let Some(&bad) = noise_columns.iter().find(|&&c| c >= d) {
        return Err(Error::DimensionMismatch { context: "noise column", expected: d, found: bad });
    }
    if noise_columns.is_empty() && options.fixed_b_squared.is_none() {
        return Err(Error::InvalidConfig("calibration needs at least one noise feature or a fixed B²".into()));
    }
    let tested: Vec<usize> = (0..d).filter(|c| !noise_columns.contains(c)).collect();
    if tested.is_empty() {
        return Err(Error::InvalidConfig("no features left to test".into()));
    }

    let statistics = empirical_statistic(params, statistic_rows)?;
    let samples = unscaled_null_samples(params, reference_rows, method, options)?;

    let (calibration, b_squared) = match options.fixed_b_squared {
        Some(b2) => (None, b2),
        None => {
            let noise_stats: Vec<f64> = noise_columns.iter().map(|&c| statistics.values[c]).collect();
            let pooled: Vec<f64> = noise_columns.iter().flat_map(|&c| samples.column(c).to_vec()).collect();
            let cal = estimate_scale(&noise_stats, &pooled)?;
            let b2 = cal.b_squared;
            (Some(cal), b2)
        }
    };

    let tested_stats = FeatureStatistics {
        values: tested.iter().map(|&c| statistics.values[c]).collect(),
        ..statistics.clone()
    };
    let mut rank = vec![0; tested.len()];
    for (r, &i) in rank_features(&tested_stats).iter().enumerate() {
        rank[i] = r + 1;
    }

    let mut decisions = Vec::with_capacity(tested.len());
    for (i, &c) in tested.iter().enumerate() {
        let column = samples.column(c).to_vec();
        let quantile = empirical_quantile(&column, 1.0 - options.level, method)?.scaled(b_squared);
        let statistic = statistics.values[c];
        decisions.push(FeatureDecision {
            name: column_names[c].clone(),
            column: c,
            statistic,
            rejected: reject_null(statistic, &quantile),
            quantile,
            rank: rank[i],
        });
    }
    Ok(TestOutcome { method, level: options.level, statistics, calibration, b_squared, decisions })
}
