use std::path::PathBuf;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::io::ingest_csv;
use super::report::{FeatureRecord, MethodMetadata, ModelMetrics, Report, TOOL_NAME, TOOL_VERSION};
use crate::asymptotics::QuantileMethod;
use crate::calibration::{add_noise_features, estimate_scale, DEFAULT_NOISE_FEATURES};
use crate::data::{Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::procedure::{significance_test, unscaled_null_samples, TestOptions};
use crate::rng::{derive_seed, substream};
use crate::simulation::{power_size_experiment, DgpConfig, ExperimentConfig};
use crate::statistic::{empirical_statistic, rank_features};
use crate::train::{predict_mse, train, FitResult, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Fit,
    Test,
    Simulate,
    Calibrate,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::Test => "test",
            Command::Simulate => "simulate",
            Command::Calibrate => "calibrate",
        }
    }
}

/// Which split the statistic is averaged over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticSplit {
    #[default]
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub input_path: Option<PathBuf>,
    pub target_column: String,
    /// (train, validation, test) row fractions.
    pub split_fractions: (f64, f64, f64),
    /// `None` = command default (on for data commands, off for `simulate`).
    pub standardize: Option<bool>,
    pub method: QuantileMethod,
    pub level: f64,
    pub seed: u64,
    pub noise_features: usize,
    pub statistic_split: StatisticSplit,
    pub train: TrainConfig,
    pub test: TestOptions,
    pub replications: usize,
    pub full_scale: bool,
    pub correlated: bool,
    pub output_path: Option<PathBuf>,
    pub archive_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Test,
            input_path: None,
            target_column: "y".into(),
            split_fractions: (0.7, 0.2, 0.1),
            standardize: None,
            method: QuantileMethod::Discretization,
            level: 0.05,
            seed: 0,
            noise_features: DEFAULT_NOISE_FEATURES,
            statistic_split: StatisticSplit::Train,
            train: TrainConfig::default(),
            test: TestOptions::default(),
            replications: 50,
            full_scale: false,
            correlated: false,
            output_path: None,
            archive_path: None,
        }
    }
}

/// Replication count used by `--full-scale`.
pub const FULL_SCALE_REPLICATIONS: usize = 250;

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let (a, b, c) = self.split_fractions;
        if !(a > 0.0 && b > 0.0 && c > 0.0) || ((a + b + c) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("split fractions ({a}, {b}, {c}) must be positive and sum to 1")));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidConfig(format!("level {} outside (0, 1)", self.level)));
        }
        if self.command == Command::Simulate {
            if self.replications == 0 {
                return Err(Error::InvalidConfig("replications must be positive".into()));
            }
        } else if self.input_path.is_none() {
            return Err(Error::InvalidConfig(format!("`{}` needs --input", self.command.as_str())));
        }
        if matches!(self.command, Command::Test | Command::Calibrate) && self.noise_features == 0 {
            return Err(Error::InvalidConfig("calibration needs at least one noise feature".into()));
        }
        self.train.validate()?;
        self.test_options().validate()
    }

    fn standardize_enabled(&self) -> bool {
        self.standardize.unwrap_or(self.command != Command::Simulate)
    }

    fn test_options(&self) -> TestOptions {
        TestOptions { level: self.level, seed: derive_seed(self.seed, 3), ..self.test.clone() }
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: derive_seed(self.seed, 2), ..self.train.clone() }
    }
}

/// Shuffles rows with the run seed and cuts them by the split fractions.
pub fn split_dataset(data: &Dataset, fractions: (f64, f64, f64), seed: u64) -> Result<(Dataset, Dataset, Dataset)> {
    let n = data.n_rows();
    let n_train = (fractions.0 * n as f64).floor() as usize;
    let n_val = (fractions.1 * n as f64).floor() as usize;
    if n_train == 0 || n_val == 0 || n_train + n_val >= n {
        return Err(Error::Empty("a split would be empty; provide more rows"));
    }
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut substream(seed, 0));
    Ok((
        data.select_rows(&rows[..n_train])?,
        data.select_rows(&rows[n_train..n_train + n_val])?,
        data.select_rows(&rows[n_train + n_val..])?,
    ))
}

struct Prepared {
    train: Dataset,
    val: Dataset,
    test: Dataset,
    standardizer: Option<Standardizer>,
    original_features: usize,
}

fn prepare(config: &RunConfig, with_noise: bool) -> Result<Prepared> {
    let path = config.input_path.as_ref().expect("validated");
    let data = ingest_csv(path, &config.target_column)?;
    let (mut train_set, mut val, mut test) = split_dataset(&data, config.split_fractions, derive_seed(config.seed, 0))?;
    let standardizer = if config.standardize_enabled() {
        let s = Standardizer::fit(train_set.features());
        train_set = s.apply_dataset(&train_set)?;
        val = s.apply_dataset(&val)?;
        test = s.apply_dataset(&test)?;
        Some(s)
    } else {
        None
    };
    let original_features = train_set.n_features();
    if with_noise {
        let k = config.noise_features;
        let seed = derive_seed(config.seed, 1);
        train_set = add_noise_features(&train_set, k, derive_seed(seed, 0))?;
        val = add_noise_features(&val, k, derive_seed(seed, 1))?;
        test = add_noise_features(&test, k, derive_seed(seed, 2))?;
    }
    Ok(Prepared { train: train_set, val, test, standardizer, original_features })
}

fn metrics(fit: &FitResult, p: &Prepared, hidden_units: usize) -> Result<ModelMetrics> {
    Ok(ModelMetrics {
        train_mse: predict_mse(&fit.params, &p.train)?,
        val_mse: predict_mse(&fit.params, &p.val)?,
        test_mse: predict_mse(&fit.params, &p.test)?,
        epochs_run: fit.epochs_run,
        best_epoch: fit.best_epoch,
        stopped_early: fit.stopped_early,
        hidden_units,
    })
}

fn statistic_rows<'a>(config: &RunConfig, p: &'a Prepared) -> &'a Dataset {
    match config.statistic_split {
        StatisticSplit::Train => &p.train,
        StatisticSplit::Test => &p.test,
    }
}

fn empty_report(config: &RunConfig) -> Report {
    Report {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        command: config.command.as_str().into(),
        features: Vec::new(),
        model: None,
        calibration: None,
        method: None,
        standardization: None,
        simulation: None,
        config: config.clone(),
    }
}

fn method_resolution(config: &RunConfig) -> (usize, usize) {
    match config.method {
        QuantileMethod::Series => (config.test.series.sample_count, config.test.series.truncation),
        QuantileMethod::Discretization => {
            (config.test.discretization.sample_count, config.test.discretization.functions)
        }
    }
}

fn run_fit(config: &RunConfig) -> Result<Report> {
    let p = prepare(config, false)?;
    let fit = train(&p.train, &p.val, &config.train_config())?;
    let stats = empirical_statistic(&fit.params, statistic_rows(config, &p).features().view())?;
    let order = rank_features(&stats);
    let mut rank = vec![0; order.len()];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r + 1;
    }
    let mut report = empty_report(config);
    report.features = (0..stats.values.len())
        .map(|j| FeatureRecord {
            name: p.train.column_names()[j].clone(),
            statistic: stats.values[j],
            quantile: None,
            rejected: None,
            rank: rank[j],
        })
        .collect();
    report.model = Some(metrics(&fit, &p, config.train.hidden_units)?);
    report.standardization = p.standardizer.clone();
    Ok(report)
}

fn run_calibrate(config: &RunConfig) -> Result<Report> {
    let p = prepare(config, true)?;
    let fit = train(&p.train, &p.val, &config.train_config())?;
    let stats = empirical_statistic(&fit.params, statistic_rows(config, &p).features().view())?;
    let opts = config.test_options();
    let samples = unscaled_null_samples(&fit.params, p.train.features().view(), config.method, &opts)?;
    let noise: Vec<usize> = (p.original_features..p.train.n_features()).collect();
    let noise_stats: Vec<f64> = noise.iter().map(|&c| stats.values[c]).collect();
    let pooled: Vec<f64> = noise.iter().flat_map(|&c| samples.column(c).to_vec()).collect();
    let cal = estimate_scale(&noise_stats, &pooled)?;
    let (sample_count, resolution) = method_resolution(config);
    let mut report = empty_report(config);
    report.method = Some(MethodMetadata {
        method: config.method.as_str().into(),
        level: config.level,
        sample_count,
        b_squared: cal.b_squared,
        resolution,
        statistic_split: format!("{:?}", config.statistic_split).to_lowercase(),
    });
    report.calibration = Some(cal);
    report.model = Some(metrics(&fit, &p, config.train.hidden_units)?);
    report.standardization = p.standardizer.clone();
    Ok(report)
}

fn run_test(config: &RunConfig) -> Result<Report> {
    let p = prepare(config, true)?;
    let fit = train(&p.train, &p.val, &config.train_config())?;
    let noise: Vec<usize> = (p.original_features..p.train.n_features()).collect();
    let outcome = significance_test(
        &fit.params,
        statistic_rows(config, &p).features().view(),
        p.train.features().view(),
        p.train.column_names(),
        &noise,
        config.method,
        &config.test_options(),
    )?;
    let (sample_count, resolution) = method_resolution(config);
    let mut report = empty_report(config);
    report.features = outcome
        .decisions
        .iter()
        .map(|d| FeatureRecord {
            name: d.name.clone(),
            statistic: d.statistic,
            quantile: Some(d.quantile.value),
            rejected: Some(d.rejected),
            rank: d.rank,
        })
        .collect();
    report.method = Some(MethodMetadata {
        method: config.method.as_str().into(),
        level: config.level,
        sample_count,
        b_squared: outcome.b_squared,
        resolution,
        statistic_split: format!("{:?}", config.statistic_split).to_lowercase(),
    });
    report.calibration = outcome.calibration;
    report.model = Some(metrics(&fit, &p, config.train.hidden_units)?);
    report.standardization = p.standardizer.clone();
    Ok(report)
}

/// Experiment configuration for `simulate`.
pub fn experiment_config(config: &RunConfig) -> ExperimentConfig {
    let base = if config.full_scale { DgpConfig::default() } else { DgpConfig::desk_scale(0) };
    ExperimentConfig {
        dgp: DgpConfig { correlated: config.correlated, ..base },
        train: config.train.clone(),
        methods: vec![config.method],
        include_ttest: true,
        test: config.test_options(),
        noise_features: config.noise_features,
        replications: if config.full_scale { FULL_SCALE_REPLICATIONS } else { config.replications },
        seed: config.seed,
        keep_archive: config.archive_path.is_some(),
    }
}

fn run_simulate(config: &RunConfig) -> Result<Report> {
    let sim = power_size_experiment(&experiment_config(config))?;
    if let Some(path) = &config.archive_path {
        sim.write_archive_csv(path)?;
    }
    let mut report = empty_report(config);
    report.simulation = Some(sim);
    Ok(report)
}

/// Executes one command and writes the JSON report when an output path is set.
pub fn run(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let report = match config.command {
        Command::Fit => run_fit(config)?,
        Command::Test => run_test(config)?,
        Command::Calibrate => run_calibrate(config)?,
        Command::Simulate => run_simulate(config)?,
    };
    if let Some(path) = &config.output_path {
        report.write(path)?;
    }
    Ok(report)
}
