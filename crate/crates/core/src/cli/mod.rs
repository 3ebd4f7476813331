//! Command-line orchestration: CSV ingestion, the `fit` / `test` /
//! `calibrate` / `simulate` commands and the JSON report.

pub mod io;
pub mod report;
pub mod run;

pub use io::{ingest_csv, write_csv};
pub use report::{error_json, FeatureRecord, MethodMetadata, ModelMetrics, Report};
pub use run::{run, split_dataset, Command, RunConfig, StatisticSplit};
