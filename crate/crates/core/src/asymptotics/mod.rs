//! Limiting distribution of the statistic under the null, by the Fourier
//! series representation or by the random-network discretisation, and the
//! quantiles and decisions built on it.

pub mod ensemble;
pub mod fourier;
pub mod quantile;
pub mod rate;
pub mod series;

pub use ensemble::{
    argmax_draws, build_ensemble, sample_discretization_all, sample_discretization_distribution, CovarianceMode,
    RandomFunctionEnsemble,
};
pub use fourier::{FourierWeightTable, WeightClass};
pub use quantile::{empirical_quantile, reject_null, QuantileEstimate, QuantileMethod};
pub use rate::{estimation_rate, suggested_hidden_units};
pub use series::{sample_series_distribution, SeriesSamplerConfig};
