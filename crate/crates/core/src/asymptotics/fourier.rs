//! Sobolev weights of the tensor Fourier basis on `[-1, 1]^d`.
//!
//! For a multi-index `n ∈ {0..N-1}^d` the weight is
//! `d_n² = Σ_{|α| ≤ s} Π_k γ_{n_k}^{α_k}` with `γ_m = m²π²`, `s = ⌊d/2⌋ + 2`
//! and `0^0 = 1`. The weight only depends on the multiset of components of
//! `n`, so the table stores one [`WeightClass`] per multiset together with
//! its multiplicity; [`FourierWeightTable::entries`] expands it back into
//! individual multi-indices on demand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `N^d`, the size of the full index set.
pub const DEFAULT_INDEX_BUDGET: usize = 1 << 24;

/// `γ_m = m² π²`.
pub fn gamma(m: usize) -> f64 {
    let m = m as f64;
    m * m * std::f64::consts::PI * std::f64::consts::PI
}

/// Sobolev order `⌊d/2⌋ + 2`.
pub fn smoothness(d: usize) -> usize {
    d / 2 + 2
}

/// `d_n²` for one multi-index, using the generating function
/// `Π_k 1/(1 − γ_{n_k} t)` truncated at degree `s`.
pub fn sobolev_weight(index: &[usize], s: usize) -> f64 {
    // coeffs[t] = complete homogeneous symmetric polynomial of degree t
    let mut coeffs = vec![0.0; s + 1];
    coeffs[0] = 1.0;
    for &m in index {
        let g = gamma(m);
        if g == 0.0 {
            continue;
        }
        for t in 1..=s {
            coeffs[t] += g * coeffs[t - 1];
        }
    }
    coeffs.iter().sum()
}

/// Number of multi-indices in the full index set of level `N`.
pub fn index_set_size(d: usize, truncation: usize) -> f64 {
    (truncation as f64).powi(d as i32)
}

/// Order-of-magnitude count of basis functions needed for an `L²`
/// approximation error `eps`: `(1/eps)^{d/s}`.
pub fn basis_functions_for_error(eps: f64, d: usize) -> f64 {
    (1.0 / eps).powf(d as f64 / smoothness(d) as f64)
}

/// Smallest truncation `N` with `N^{-s} ≤ eps`.
pub fn truncation_for_error(eps: f64, d: usize) -> usize {
    let n = (1.0 / eps).powf(1.0 / smoothness(d) as f64).ceil() as usize;
    n.max(1)
}

/// Multi-indices sharing a multiset of component values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightClass {
    /// `counts[m]` = number of components equal to `m`.
    pub counts: Vec<usize>,
    /// `d_n²`.
    pub weight: f64,
    /// Number of multi-indices in the class.
    pub multiplicity: f64,
}

impl WeightClass {
    /// Members whose component `j` (any fixed `j`) equals `m`.
    pub fn multiplicity_with_component(&self, m: usize) -> f64 {
        if self.counts[m] == 0 {
            return 0.0;
        }
        let d: usize = self.counts.iter().sum();
        self.multiplicity * self.counts[m] as f64 / d as f64
    }
}

/// One expanded multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierEntry {
    pub index: Vec<usize>,
    pub weight: f64,
    pub gammas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierWeightTable {
    pub dimension: usize,
    pub truncation: usize,
    pub smoothness: usize,
    pub classes: Vec<WeightClass>,
}

impl FourierWeightTable {
    pub fn new(dimension: usize, truncation: usize) -> Result<Self> {
        Self::with_budget(dimension, truncation, DEFAULT_INDEX_BUDGET)
    }

    pub fn with_budget(dimension: usize, truncation: usize, budget: usize) -> Result<Self> {
        if dimension == 0 || truncation == 0 {
            return Err(Error::InvalidConfig("Fourier table needs d ≥ 1 and N ≥ 1".into()));
        }
        let required = index_set_size(dimension, truncation);
        if required > budget as f64 {
            return Err(Error::Capacity { dimension, truncation, required, budget });
        }
        let s = smoothness(dimension);
        let mut classes = Vec::new();
        let mut counts = vec![0; truncation];
        enumerate_compositions(dimension, 0, &mut counts, &mut |c| {
            let index: Vec<usize> = c.iter().enumerate().flat_map(|(m, &k)| std::iter::repeat_n(m, k)).collect();
            classes.push(WeightClass {
                counts: c.to_vec(),
                weight: sobolev_weight(&index, s),
                multiplicity: multinomial(c),
            });
        });
        Ok(Self { dimension, truncation, smoothness: s, classes })
    }

    /// Total number of multi-indices, `N^d`.
    pub fn len(&self) -> usize {
        self.classes.iter().map(|c| c.multiplicity).sum::<f64>().round() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Every multi-index of `{0..N-1}^d` in lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = FourierEntry> + '_ {
        let (d, n) = (self.dimension, self.truncation);
        let total = n.pow(d as u32);
        (0..total).map(move |mut flat| {
            let mut index = vec![0; d];
            for k in (0..d).rev() {
                index[k] = flat % n;
                flat /= n;
            }
            FourierEntry {
                weight: sobolev_weight(&index, self.smoothness),
                gammas: index.iter().map(|&m| gamma(m)).collect(),
                index,
            }
        })
    }
}

fn enumerate_compositions(remaining: usize, slot: usize, counts: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    if slot + 1 == counts.len() {
        counts[slot] = remaining;
        visit(counts);
        counts[slot] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        counts[slot] = k;
        enumerate_compositions(remaining - k, slot + 1, counts, visit);
    }
    counts[slot] = 0;
}

fn multinomial(counts: &[usize]) -> f64 {
    let mut total = 0usize;
    let mut value = 1.0;
    for &k in counts {
        for i in 1..=k {
            total += 1;
            value *= total as f64 / i as f64;
        }
    }
    value.round()
}
