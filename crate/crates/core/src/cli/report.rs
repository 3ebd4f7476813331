use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::RunConfig;
use crate::calibration::CalibrationResult;
use crate::data::Standardizer;
use crate::error::{Error, Result};
use crate::simulation::SimulationReport;

pub const TOOL_NAME: &str = "sigtest";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub name: String,
    pub statistic: f64,
    /// Calibrated quantile, absent for `fit`.
    pub quantile: Option<f64>,
    pub rejected: Option<bool>,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub train_mse: f64,
    pub val_mse: f64,
    pub test_mse: f64,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub stopped_early: bool,
    pub hidden_units: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodMetadata {
    pub method: String,
    pub level: f64,
    pub sample_count: usize,
    pub b_squared: f64,
    /// Fourier truncation (series) or ensemble size (discretization).
    pub resolution: usize,
    pub statistic_split: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub features: Vec<FeatureRecord>,
    pub model: Option<ModelMetrics>,
    pub calibration: Option<CalibrationResult>,
    pub method: Option<MethodMetadata>,
    pub standardization: Option<Standardizer>,
    pub simulation: Option<SimulationReport>,
    pub config: RunConfig,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes the JSON report and, when there are feature records, a flat
    /// CSV table next to it (same path, `.csv` extension).
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        if !self.features.is_empty() {
            let csv_path = path.with_extension("csv");
            let mut w = csv::Writer::from_path(&csv_path)?;
            w.write_record(["name", "statistic", "quantile", "rejected", "rank"])?;
            for f in &self.features {
                w.write_record([
                    f.name.clone(),
                    f.statistic.to_string(),
                    f.quantile.map(|q| q.to_string()).unwrap_or_default(),
                    f.rejected.map(|r| r.to_string()).unwrap_or_default(),
                    f.rank.to_string(),
                ])?;
            }
            w.flush().map_err(|source| Error::Io { path: csv_path.display().to_string(), source })?;
        }
        Ok(())
    }
}

/// Machine-readable error body printed on failure.
pub fn error_json(err: &Error) -> String {
    serde_json::json!({
        "error": {
            "kind": err.kind().as_str(),
            "exit_code": err.kind().exit_code(),
            "message": err.to_string(),
        }
    })
    .to_string()
}
