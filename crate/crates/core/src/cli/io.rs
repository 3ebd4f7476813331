//! CSV datasets: comma-separated, header row, one numeric target column.

use std::collections::HashSet;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Reads `path`, using `target_column` as the response and every other column as a feature.
pub fn ingest_csv(path: &Path, target_column: &str) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(Error::Empty("csv header"));
    }
    let mut seen = HashSet::new();
    for h in &header {
        if h.is_empty() {
            return Err(Error::InvalidConfig("csv header has an empty column name".into()));
        }
        if !seen.insert(h.as_str()) {
            return Err(Error::DuplicateColumn(h.clone()));
        }
    }
    let target = header
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::MissingColumn(target_column.to_string()))?;
    if header.len() < 2 {
        return Err(Error::Empty("csv has no feature columns"));
    }
    let d = header.len() - 1;

    let mut values = Vec::new();
    let mut targets = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::ParseCell {
                row: i + 1,
                column: header[j].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::ParseCell { row: i + 1, column: header[j].clone(), value: cell.to_string() });
            }
            if j == target {
                targets.push(v);
            } else {
                values.push(v);
            }
        }
    }
    if targets.is_empty() {
        return Err(Error::Empty("csv has no data rows"));
    }
    let n = targets.len();
    let features = Array2::from_shape_vec((n, d), values).expect("row lengths checked by csv reader");
    let names = header.into_iter().enumerate().filter(|(j, _)| *j != target).map(|(_, h)| h).collect();
    Dataset::new(features, Array1::from(targets), names)
}

/// Writes features followed by the target column named `target_name`.
/// Values use the shortest representation that parses back to the same `f64`.
pub fn write_csv(data: &Dataset, path: &Path, target_name: &str) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = data.column_names().iter().map(String::as_str).collect();
    header.push(target_name);
    writer.write_record(&header)?;
    for (row, y) in data.features().rows().into_iter().zip(data.targets()) {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(y.to_string());
        writer.write_record(&rec)?;
    }
    writer.flush().map_err(|source| Error::Io { path: path.display().to_string(), source })
}
