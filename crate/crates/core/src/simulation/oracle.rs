//! Exact `λ_j = E[(∂f₀/∂x_j)²]` for the benchmark regression function under
//! independent Uniform(−1, 1) features.

use crate::error::{Error, Result};
use crate::simulation::dgp::DGP_FEATURES;

/// True statistic of feature `feature` (0-based, `0..8`).
pub fn true_lambda_oracle(feature: usize) -> Result<f64> {
    let v = match feature {
        // E[(2 X1)²]
        0 => 4.0 / 3.0,
        // E[X3²], E[X2²]
        1 | 2 => 1.0 / 3.0,
        // E[sin² X4]
        3 => 0.5 - 2f64.sin() / 4.0,
        // E[X6² exp(2 X5 X6)] = ½ ∫₀¹ t sinh(2t) dt
        4 | 5 => 2f64.cosh() / 4.0 - 2f64.sinh() / 8.0,
        6 => 0.01,
        7 => 0.0,
        _ => {
            return Err(Error::DimensionMismatch {
                context: "benchmark feature index",
                expected: DGP_FEATURES,
                found: feature,
            })
        }
    };
    Ok(v)
}

/// All eight values.
pub fn true_lambdas() -> [f64; DGP_FEATURES] {
    std::array::from_fn(|j| true_lambda_oracle(j).expect("index in range"))
}
