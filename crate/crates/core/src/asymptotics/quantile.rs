use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the limiting distribution was sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileMethod {
    Series,
    Discretization,
}

impl QuantileMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            QuantileMethod::Series => "series",
            QuantileMethod::Discretization => "discretization",
        }
    }
}

impl std::str::FromStr for QuantileMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "series" | "s" => Ok(QuantileMethod::Series),
            "discretization" | "d" => Ok(QuantileMethod::Discretization),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub level: f64,
    pub value: f64,
    pub method: QuantileMethod,
    pub sample_count: usize,
    /// Scale already applied to `value` (1 for unscaled samples).
    pub scale_b_squared: f64,
}

impl QuantileEstimate {
    /// Same order statistic multiplied by a calibrated scale.
    pub fn scaled(&self, b_squared: f64) -> Self {
        Self {
            value: self.value / self.scale_b_squared * b_squared,
            scale_b_squared: b_squared,
            ..self.clone()
        }
    }
}

/// Index `i` (1-based) of the order statistic for `level`: the `i` with
/// `level ∈ ((i−1)/m, i/m]`.
pub fn order_statistic_index(m: usize, level: f64) -> usize {
    let x = level * m as f64;
    let nearest = x.round();
    // absorb representation error such as 0.95 * 20 = 19.000000000000004
    let i = if (x - nearest).abs() <= 1e-9 * (m as f64).max(1.0) { nearest } else { x.ceil() };
    (i as usize).clamp(1, m)
}

/// Empirical quantile: the `⌈level·m⌉`-th smallest sample.
pub fn empirical_quantile(samples: &[f64], level: f64, method: QuantileMethod) -> Result<QuantileEstimate> {
    if samples.is_empty() {
        return Err(Error::Empty("quantile samples"));
    }
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::InvalidConfig(format!("quantile level {level} outside (0, 1]")));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("quantile samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let i = order_statistic_index(sorted.len(), level);
    Ok(QuantileEstimate {
        level,
        value: sorted[i - 1],
        method,
        sample_count: sorted.len(),
        scale_b_squared: 1.0,
    })
}

/// Rejects the null when the statistic strictly exceeds the quantile.
pub fn reject_null(statistic_value: f64, quantile: &QuantileEstimate) -> bool {
    statistic_value > quantile.value
}
