use crate::error::{Error, Result};

/// Estimation rate `r_n = (n / ln n)^{(d+1) / (2(2d+1))}`.
///
/// Exposed for callers that want to rescale the statistic by `r_n²`
/// explicitly; the calibrated test absorbs this scale.
pub fn estimation_rate(n: usize, d: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidConfig("estimation rate needs n ≥ 2".into()));
    }
    if d == 0 {
        return Err(Error::InvalidConfig("estimation rate needs d ≥ 1".into()));
    }
    let n = n as f64;
    let exponent = (d + 1) as f64 / (2.0 * (2 * d + 1) as f64);
    Ok((n / n.ln()).powf(exponent))
}

/// Largest `K` with `K^{2+1/d} ln K ≤ n` (the sieve growth condition).
pub fn suggested_hidden_units(n: usize, d: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::InvalidConfig("suggested_hidden_units needs d ≥ 1".into()));
    }
    let budget = n as f64;
    let p = 2.0 + 1.0 / d as f64;
    let cost = |k: usize| (k as f64).powf(p) * (k as f64).ln();
    let mut k = 1;
    while cost(k + 1) <= budget {
        k += 1;
    }
    Ok(k)
}
