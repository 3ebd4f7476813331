//! Simulation study: benchmark data, analytic oracles, the OLS t-test
//! baseline and the power/size replication harness.

pub mod copula;
pub mod dgp;
pub mod experiment;
pub mod oracle;
pub mod ttest;

pub use copula::{cholesky, correlated_uniforms, generate_correlated_features, normal_cdf};
pub use dgp::{generate_dgp, paper_covariance, regression_function, regression_gradient, DgpConfig, DGP_FEATURES};
pub use experiment::{power_size_experiment, ExperimentConfig, ReplicationRecord, SimulationReport, TTEST_LABEL};
pub use oracle::{true_lambda_oracle, true_lambdas};
pub use ttest::{ttest_baseline, OlsTest};
