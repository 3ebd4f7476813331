//! Samples of the chi-square-mixture limit
//!
//! `Z = B² · Σ_{i,n} (γ_{n_j} / d_n⁴) χ²_{n,i} / Σ_{i,n} χ²_{n,i} / d_n²`
//!
//! over `n ∈ {0..N-1}^d`, `i ∈ {0,1}^d`, with independent one-degree chi-square
//! variables. Draws that share both weights are pooled: the sum of `k`
//! independent χ²(1) variables is χ²(k), so each (weight class, `n_j`) group
//! contributes a single χ²(2^d · multiplicity) draw.

use rand_distr::{ChiSquared, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fourier::{gamma, FourierWeightTable};
use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSamplerConfig {
    pub table: FourierWeightTable,
    pub target_feature: usize,
    pub scale_b_squared: f64,
    pub sample_count: usize,
    pub seed: u64,
}

/// One pooled group of chi-square terms.
#[derive(Debug, Clone, Copy)]
struct PooledTerm {
    numerator_weight: f64,
    denominator_weight: f64,
    chi2: ChiSquared<f64>,
}

fn pooled_terms(table: &FourierWeightTable) -> Result<Vec<PooledTerm>> {
    let sign_patterns = 2f64.powi(table.dimension as i32);
    let mut terms = Vec::new();
    for class in &table.classes {
        let w = class.weight;
        for m in 0..table.truncation {
            let members = class.multiplicity_with_component(m);
            if members == 0.0 {
                continue;
            }
            let chi2 = ChiSquared::new(sign_patterns * members)
                .map_err(|e| Error::Degenerate(format!("chi-square degrees of freedom: {e}")))?;
            terms.push(PooledTerm { numerator_weight: gamma(m) / (w * w), denominator_weight: 1.0 / w, chi2 });
        }
    }
    if terms.is_empty() {
        return Err(Error::Empty("Fourier index set"));
    }
    Ok(terms)
}

/// Draws `sample_count` values of the truncated series; sample `i` uses its own
/// random stream so the output is independent of thread scheduling.
pub fn sample_series_distribution(config: &SeriesSamplerConfig) -> Result<Vec<f64>> {
    if !(config.scale_b_squared >= 0.0) || !config.scale_b_squared.is_finite() {
        return Err(Error::InvalidConfig("B² must be finite and non-negative".into()));
    }
    if config.target_feature >= config.table.dimension {
        return Err(Error::DimensionMismatch {
            context: "series target feature",
            expected: config.table.dimension,
            found: config.target_feature,
        });
    }
    if config.sample_count == 0 {
        return Err(Error::InvalidConfig("sample_count must be positive".into()));
    }
    // every coordinate plays the same role in the tensor basis, so the
    // pooled terms do not depend on target_feature
    let terms = pooled_terms(&config.table)?;
    let b2 = config.scale_b_squared;
    Ok((0..config.sample_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(config.seed, i as u64);
            let (mut num, mut den) = (0.0, 0.0);
            for t in &terms {
                let x = t.chi2.sample(&mut rng);
                num += t.numerator_weight * x;
                den += t.denominator_weight * x;
            }
            if b2 == 0.0 {
                0.0
            } else {
                b2 * num / den
            }
        })
        .collect())
}
