//! Power/size replication harness.
//!
//! Each replication draws fresh data, appends noise features, fits the
//! network once, and tests every benchmark feature with each requested
//! method (and optionally the OLS t-test). Replication `r` derives all of
//! its seeds from `(seed, r)`.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::QuantileMethod;
use crate::calibration::{add_noise_features, DEFAULT_NOISE_FEATURES};
use crate::error::{Error, Result};
use crate::procedure::{significance_test, TestOptions};
use crate::rng::derive_seed;
use crate::simulation::dgp::{generate_dgp, DgpConfig};
use crate::simulation::ttest::ttest_baseline;
use crate::train::{predict_mse, train, TrainConfig};

pub const TTEST_LABEL: &str = "t_test";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dgp: DgpConfig,
    pub train: TrainConfig,
    pub methods: Vec<QuantileMethod>,
    pub include_ttest: bool,
    pub test: TestOptions,
    pub noise_features: usize,
    pub replications: usize,
    pub seed: u64,
    pub keep_archive: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dgp: DgpConfig::desk_scale(0),
            train: TrainConfig::default(),
            methods: vec![QuantileMethod::Discretization],
            include_ttest: true,
            test: TestOptions::default(),
            noise_features: DEFAULT_NOISE_FEATURES,
            replications: 50,
            seed: 0,
            keep_archive: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub seed: u64,
    /// Statistic of every tested feature.
    pub statistics: Vec<f64>,
    /// `rejections[m][j]` for method column `m`.
    pub rejections: Vec<Vec<bool>>,
    /// Calibrated scale per NN method.
    pub b_squared: Vec<f64>,
    pub ttest_p_values: Option<Vec<f64>>,
    pub test_mse: f64,
    pub epochs_run: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub feature_names: Vec<String>,
    /// Column labels of `rejection_rates`.
    pub methods: Vec<String>,
    /// `rejection_rates[j][m]`: features × methods.
    pub rejection_rates: Vec<Vec<f64>>,
    pub rejection_counts: Vec<Vec<usize>>,
    /// Successful replications, the denominator of every rate.
    pub replications: usize,
    pub failed_replications: usize,
    pub failures: Vec<String>,
    pub test_level: f64,
    pub mean_test_mse: f64,
    pub per_replication_statistics: Option<Vec<ReplicationRecord>>,
}

impl SimulationReport {
    pub fn rate(&self, feature: usize, method: &str) -> Option<f64> {
        let m = self.methods.iter().position(|l| l == method)?;
        self.rejection_rates.get(feature).map(|row| row[m])
    }

    /// Per-replication table: one row per (replication, feature).
    pub fn write_archive_csv(&self, path: &Path) -> Result<()> {
        let records = self
            .per_replication_statistics
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("report has no per-replication archive".into()))?;
        let io = |source| Error::Io { path: path.display().to_string(), source };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        let mut header = vec!["replication".to_string(), "seed".into(), "feature".into(), "statistic".into()];
        header.extend(self.methods.iter().map(|m| format!("reject_{m}")));
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        for r in records {
            for (j, name) in self.feature_names.iter().enumerate() {
                let mut row = vec![r.replication.to_string(), r.seed.to_string(), name.clone(), format!("{:e}", r.statistics[j])];
                row.extend(r.rejections.iter().map(|col| u8::from(col[j]).to_string()));
                writeln!(out, "{}", row.join(",")).map_err(io)?;
            }
        }
        out.flush().map_err(io)
    }
}

enum Outcome {
    Done(ReplicationRecord, Vec<String>),
    Failed(String),
}

fn run_replication(config: &ExperimentConfig, r: usize) -> Result<Outcome> {
    let seed = derive_seed(config.seed, r as u64);
    let dgp = DgpConfig { seed: derive_seed(seed, 10), ..config.dgp.clone() };
    let (train_raw, val_raw, test_raw) = generate_dgp(&dgp)?;
    let n_features = train_raw.n_features();
    let train_set = add_noise_features(&train_raw, config.noise_features, derive_seed(seed, 11))?;
    let val = add_noise_features(&val_raw, config.noise_features, derive_seed(seed, 12))?;
    let test = add_noise_features(&test_raw, config.noise_features, derive_seed(seed, 13))?;

    let fit_cfg = TrainConfig { seed: derive_seed(seed, 14), ..config.train.clone() };
    let fit = match train(&train_set, &val, &fit_cfg) {
        Ok(f) => f,
        Err(e @ Error::Diverged { .. }) => return Ok(Outcome::Failed(format!("replication {r}: {e}"))),
        Err(e) => return Err(e),
    };
    let noise: Vec<usize> = (n_features..train_set.n_features()).collect();
    let opts = TestOptions { seed: derive_seed(seed, 15), ..config.test.clone() };

    let mut rejections = Vec::new();
    let mut b_squared = Vec::new();
    let mut statistics = Vec::new();
    for &method in &config.methods {
        let out = significance_test(
            &fit.params,
            train_set.features().view(),
            train_set.features().view(),
            train_set.column_names(),
            &noise,
            method,
            &opts,
        )?;
        statistics = out.decisions.iter().map(|d| d.statistic).collect();
        rejections.push(out.rejections());
        b_squared.push(out.b_squared);
    }
    let ttest_p_values = if config.include_ttest {
        let t = ttest_baseline(&train_raw, config.test.level)?;
        rejections.push(t.rejections);
        Some(t.p_values)
    } else {
        None
    };
    if statistics.is_empty() {
        let stats = crate::statistic::empirical_statistic(&fit.params, train_set.features().view())?;
        statistics = stats.values[..n_features].to_vec();
    }
    let record = ReplicationRecord {
        replication: r,
        seed,
        statistics,
        rejections,
        b_squared,
        ttest_p_values,
        test_mse: predict_mse(&fit.params, &test)?,
        epochs_run: fit.epochs_run,
    };
    Ok(Outcome::Done(record, train_raw.column_names().to_vec()))
}

/// Runs `config.replications` independent replications and aggregates
/// rejection rates. Replications whose training diverges are excluded from
/// the rates and reported in `failures`.
pub fn power_size_experiment(config: &ExperimentConfig) -> Result<SimulationReport> {
    if config.replications == 0 {
        return Err(Error::InvalidConfig("replications must be positive".into()));
    }
    if config.methods.is_empty() && !config.include_ttest {
        return Err(Error::InvalidConfig("no test method requested".into()));
    }
    config.test.validate()?;
    config.train.validate()?;

    let outcomes: Vec<Outcome> =
        (0..config.replications).into_par_iter().map(|r| run_replication(config, r)).collect::<Result<_>>()?;

    let mut methods: Vec<String> = config.methods.iter().map(|m| m.as_str().to_string()).collect();
    if config.include_ttest {
        methods.push(TTEST_LABEL.to_string());
    }
    let mut feature_names = Vec::new();
    let mut counts: Vec<Vec<usize>> = Vec::new();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut mse_sum = 0.0;
    for outcome in outcomes {
        match outcome {
            Outcome::Failed(msg) => failures.push(msg),
            Outcome::Done(rec, names) => {
                if counts.is_empty() {
                    counts = vec![vec![0; methods.len()]; names.len()];
                    feature_names = names;
                }
                for (m, col) in rec.rejections.iter().enumerate() {
                    for (j, &rej) in col.iter().enumerate() {
                        counts[j][m] += usize::from(rej);
                    }
                }
                mse_sum += rec.test_mse;
                records.push(rec);
            }
        }
    }
    let ok = records.len();
    if ok == 0 {
        return Err(Error::Degenerate(format!("all {} replications failed to train", config.replications)));
    }
    let rates = counts.iter().map(|row| row.iter().map(|&c| c as f64 / ok as f64).collect()).collect();
    Ok(SimulationReport {
        feature_names,
        methods,
        rejection_rates: rates,
        rejection_counts: counts,
        replications: ok,
        failed_replications: failures.len(),
        failures,
        test_level: config.test.level,
        mean_test_mse: mse_sum / ok as f64,
        per_replication_statistics: config.keep_archive.then_some(records),
    })
}
