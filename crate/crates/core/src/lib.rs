//! Significance tests for the input features of a single-hidden-layer
//! sigmoid neural-network regression.

pub mod asymptotics;
pub mod calibration;
pub mod cli;
pub mod data;
pub mod error;
pub mod nn;
pub mod procedure;
pub mod rng;
pub mod simulation;
pub mod statistic;
pub mod train;

pub use data::Dataset;
pub use error::{Error, Result};
pub use nn::{forward, input_gradient, NetworkParams};
pub use train::{predict_mse, train, FitResult, TrainConfig};
