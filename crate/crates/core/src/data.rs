//! Tabular regression data.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature matrix (n × d), target vector and column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    targets: Array1<f64>,
    column_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        targets: Array1<f64>,
        column_names: Vec<String>,
    ) -> Result<Self> {
        let (n, d) = features.dim();
        if n == 0 {
            return Err(Error::Empty("dataset has no rows"));
        }
        if d == 0 {
            return Err(Error::Empty("dataset has no feature columns"));
        }
        if targets.len() != n {
            return Err(Error::DimensionMismatch {
                context: "dataset targets",
                expected: n,
                found: targets.len(),
            });
        }
        if column_names.len() != d {
            return Err(Error::DimensionMismatch {
                context: "dataset column names",
                expected: d,
                found: column_names.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset features"));
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset targets"));
        }
        Ok(Self {
            features: features.as_standard_layout().into_owned(),
            targets,
            column_names,
        })
    }

    /// Builds a dataset with default column names `x1..xd`.
    pub fn unnamed(features: Array2<f64>, targets: Array1<f64>) -> Result<Self> {
        let names = default_names(features.ncols());
        Self::new(features, targets, names)
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn targets(&self) -> &Array1<f64> {
        &self.targets
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let features = self.features.select(Axis(0), rows);
        let targets = self.targets.select(Axis(0), rows);
        Self::new(features, targets, self.column_names.clone())
    }

    /// Copy of the dataset without feature column `column`.
    pub fn without_column(&self, column: usize) -> Result<Self> {
        let d = self.n_features();
        if column >= d {
            return Err(Error::DimensionMismatch {
                context: "column to drop",
                expected: d,
                found: column,
            });
        }
        let keep: Vec<usize> = (0..d).filter(|&j| j != column).collect();
        let names = keep.iter().map(|&j| self.column_names[j].clone()).collect();
        Self::new(
            self.features.select(Axis(1), &keep),
            self.targets.clone(),
            names,
        )
    }

    /// Appends feature columns.
    pub fn with_extra_columns(&self, extra: Array2<f64>, names: Vec<String>) -> Result<Self> {
        if extra.nrows() != self.n_rows() {
            return Err(Error::DimensionMismatch {
                context: "appended columns",
                expected: self.n_rows(),
                found: extra.nrows(),
            });
        }
        let features = ndarray::concatenate(Axis(1), &[self.features.view(), extra.view()])
            .expect("row counts checked above");
        let mut column_names = self.column_names.clone();
        column_names.extend(names);
        Self::new(features, self.targets.clone(), column_names)
    }

    pub fn with_features(&self, features: Array2<f64>) -> Result<Self> {
        Self::new(features, self.targets.clone(), self.column_names.clone())
    }
}

pub fn default_names(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x{j}")).collect()
}

/// Checks that two datasets describe the same feature space.
pub fn ensure_same_width(a: &Dataset, b: &Dataset, context: &'static str) -> Result<()> {
    if a.n_features() != b.n_features() {
        return Err(Error::DimensionMismatch {
            context,
            expected: a.n_features(),
            found: b.n_features(),
        });
    }
    Ok(())
}

/// Per-column centering and scaling fitted on one split and applied to others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    /// Fits column means and standard deviations. Constant columns keep scale 1.
    pub fn fit(features: &Array2<f64>) -> Self {
        let n = features.nrows() as f64;
        let mut means = Vec::with_capacity(features.ncols());
        let mut scales = Vec::with_capacity(features.ncols());
        for col in features.columns() {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            means.push(mean);
            scales.push(if sd > 0.0 { sd } else { 1.0 });
        }
        Self { means, scales }
    }

    pub fn apply(&self, features: &Array2<f64>) -> Result<Array2<f64>> {
        if features.ncols() != self.means.len() {
            return Err(Error::DimensionMismatch {
                context: "standardizer",
                expected: self.means.len(),
                found: features.ncols(),
            });
        }
        let mut out = features.clone();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (m, s) = (self.means[j], self.scales[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        Ok(out)
    }

    pub fn apply_dataset(&self, data: &Dataset) -> Result<Dataset> {
        data.with_features(self.apply(data.features())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_inconsistent_shapes() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        assert!(matches!(
            Dataset::unnamed(x.clone(), array![1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Dataset::unnamed(Array2::zeros((0, 2)), Array1::zeros(0)),
            Err(Error::Empty(_))
        ));
        let mut bad = x;
        bad[[0, 1]] = f64::NAN;
        assert!(matches!(
            Dataset::unnamed(bad, array![1.0, 2.0]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn drop_column_keeps_names_aligned() {
        let ds = Dataset::unnamed(array![[1.0, 2.0, 3.0]], array![0.0]).unwrap();
        let dropped = ds.without_column(1).unwrap();
        assert_eq!(dropped.column_names(), &["x1".to_string(), "x3".to_string()]);
        assert_eq!(dropped.features(), &array![[1.0, 3.0]]);
    }

    #[test]
    fn standardizer_is_idempotent_on_its_own_output() {
        let x = array![[1.0, 10.0], [2.0, 10.0], [6.0, 10.0]];
        let s = Standardizer::fit(&x);
        let z = s.apply(&x).unwrap();
        let again = Standardizer::fit(&z);
        for j in 0..2 {
            assert!(again.means[j].abs() < 1e-12);
        }
        assert!((again.scales[0] - 1.0).abs() < 1e-12);
        // constant column stays centred at zero with unit scale
        assert_eq!(s.scales[1], 1.0);
        assert!(z.column(1).iter().all(|v| *v == 0.0));
    }
}
