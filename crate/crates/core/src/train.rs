//! Mini-batch Adam fitting with early stopping on a validation split.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{ensure_same_width, Dataset};
use crate::error::{Error, Result};
use crate::nn::{sigmoid, NetworkParams};
use crate::rng::substream;

/// Fitting hyperparameters. Defaults follow the simulation protocol
/// (Adam 0.001 / 0.9 / 0.999, batch 32, 150 epochs, δ = 1e-5, patience 5).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub early_stop_min_delta: f64,
    pub early_stop_patience: usize,
    pub l1_weight: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_units: 25,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-7,
            batch_size: 32,
            max_epochs: 150,
            early_stop_min_delta: 1e-5,
            early_stop_patience: 5,
            l1_weight: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.hidden_units == 0 {
            return bad("hidden_units must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) || !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("Adam decay rates must lie in (0, 1)");
        }
        if !(self.adam_epsilon > 0.0) {
            return bad("adam_epsilon must be positive");
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.early_stop_patience == 0 {
            return bad("batch_size, max_epochs and early_stop_patience must be positive");
        }
        if !(self.early_stop_min_delta >= 0.0) || !(self.l1_weight >= 0.0) {
            return bad("early_stop_min_delta and l1_weight must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: NetworkParams,
    pub train_loss_history: Vec<f64>,
    pub val_loss_history: Vec<f64>,
    pub epochs_run: usize,
    pub stopped_early: bool,
    /// Validation MSE of the initial network, before any update.
    pub initial_val_loss: f64,
    /// Epoch whose parameters were kept (0 = initial network).
    pub best_epoch: usize,
}

impl FitResult {
    pub fn best_val_loss(&self) -> f64 {
        if self.best_epoch == 0 {
            self.initial_val_loss
        } else {
            self.val_loss_history[self.best_epoch - 1]
        }
    }
}

/// Flat parameter vector `[b0, b_1..b_K, a0_1..a0_K, A (row-major K×d)]`.
struct Flat {
    k: usize,
    d: usize,
    theta: Vec<f64>,
}

impl Flat {
    fn from_params(p: &NetworkParams) -> Self {
        let (k, d) = p.weights_hidden.dim();
        let mut theta = Vec::with_capacity(1 + k * (d + 2));
        theta.push(p.bias_out);
        theta.extend(p.weights_out.iter());
        theta.extend(p.bias_hidden.iter());
        theta.extend(p.weights_hidden.iter());
        Self { k, d, theta }
    }

    fn to_params(&self) -> NetworkParams {
        let (k, d) = (self.k, self.d);
        NetworkParams {
            bias_out: self.theta[0],
            weights_out: Array1::from(self.theta[1..1 + k].to_vec()),
            bias_hidden: Array1::from(self.theta[1 + k..1 + 2 * k].to_vec()),
            weights_hidden: Array2::from_shape_vec((k, d), self.theta[1 + 2 * k..].to_vec())
                .expect("flat layout matches shape"),
        }
    }

    /// Output at `x`, storing hidden activations in `hidden`.
    #[inline]
    fn eval(&self, x: &[f64], hidden: &mut [f64]) -> f64 {
        let (k, d) = (self.k, self.d);
        let b = &self.theta[1..1 + k];
        let a0 = &self.theta[1 + k..1 + 2 * k];
        let a = &self.theta[1 + 2 * k..];
        let mut out = self.theta[0];
        for u in 0..k {
            let row = &a[u * d..(u + 1) * d];
            let z = a0[u] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            let h = sigmoid(z);
            hidden[u] = h;
            out += b[u] * h;
        }
        out
    }

    fn mse(&self, data: &Dataset) -> f64 {
        let mut hidden = vec![0.0; self.k];
        let x = data.features();
        let y = data.targets();
        let mut acc = 0.0;
        for (i, row) in x.rows().into_iter().enumerate() {
            let r = self.eval(row.as_slice().expect("standard layout"), &mut hidden) - y[i];
            acc += r * r;
        }
        acc / data.n_rows() as f64
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(len: usize) -> Self {
        Self { m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }

    fn step(&mut self, theta: &mut [f64], grad: &[f64], cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        let lr = cfg.learning_rate * c2.sqrt() / c1;
        for i in 0..theta.len() {
            let g = grad[i];
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * g;
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g * g;
            theta[i] -= lr * self.m[i] / (self.v[i].sqrt() + cfg.adam_epsilon);
        }
    }
}

/// Fits the network to `train` by minimising mean squared error (plus the
/// optional L1 penalty), keeping the parameters with the best validation loss.
pub fn train(train: &Dataset, val: &Dataset, config: &TrainConfig) -> Result<FitResult> {
    config.validate()?;
    ensure_same_width(train, val, "validation features")?;
    let n = train.n_rows();
    if config.batch_size > n {
        return Err(Error::InvalidConfig(format!(
            "batch_size {} exceeds training rows {n}",
            config.batch_size
        )));
    }
    let (k, d) = (config.hidden_units, train.n_features());

    let mut init_rng = substream(config.seed, 0);
    let mut shuffle_rng = substream(config.seed, 1);
    let mut init = NetworkParams::training_init(k, d, &mut init_rng);
    // start the output bias at the target mean so the hidden layer is not
    // saturated while b0 travels to the response level
    init.bias_out = train.targets().mean().unwrap_or(0.0);
    let mut net = Flat::from_params(&init);
    let p = net.theta.len();
    let mut adam = Adam::new(p);
    let mut grad = vec![0.0; p];
    let mut hidden = vec![0.0; k];

    let x = train.features();
    let y = train.targets();
    let mut order: Vec<usize> = (0..n).collect();

    let initial_val_loss = net.mse(val);
    let mut best_val = initial_val_loss;
    let mut best_theta = net.theta.clone();
    let mut best_epoch = 0;
    let mut wait = 0;
    let mut stopped_early = false;
    let mut train_hist = Vec::new();
    let mut val_hist = Vec::new();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut sq_err_sum = 0.0;
        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 2.0 / batch.len() as f64;
            let mut batch_sq = 0.0;
            {
                let (g_b0, rest) = grad.split_first_mut().expect("non-empty");
                let (g_b, rest) = rest.split_at_mut(k);
                let (g_a0, g_a) = rest.split_at_mut(k);
                let b = &net.theta[1..1 + k];
                for &i in batch {
                    let row = x.row(i);
                    let xs = row.as_slice().expect("standard layout");
                    let r = net.eval(xs, &mut hidden) - y[i];
                    batch_sq += r * r;
                    let r2 = scale * r;
                    *g_b0 += r2;
                    for u in 0..k {
                        let h = hidden[u];
                        g_b[u] += r2 * h;
                        let delta = r2 * b[u] * h * (1.0 - h);
                        g_a0[u] += delta;
                        for (g, v) in g_a[u * d..(u + 1) * d].iter_mut().zip(xs) {
                            *g += delta * v;
                        }
                    }
                }
            }
            if !batch_sq.is_finite() {
                return Err(Error::Diverged { epoch, batch: batch_idx });
            }
            if config.l1_weight > 0.0 {
                for (g, t) in grad.iter_mut().zip(&net.theta) {
                    *g += config.l1_weight * sign(*t);
                }
            }
            adam.step(&mut net.theta, &grad, config);
            sq_err_sum += batch_sq;
        }
        let val_loss = net.mse(val);
        if !val_loss.is_finite() || net.theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Diverged { epoch, batch: n.div_ceil(config.batch_size) - 1 });
        }
        train_hist.push(sq_err_sum / n as f64);
        val_hist.push(val_loss);

        if val_loss < best_val - config.early_stop_min_delta {
            best_val = val_loss;
            best_theta.copy_from_slice(&net.theta);
            best_epoch = epoch;
            wait = 0;
        } else {
            wait += 1;
            if wait >= config.early_stop_patience {
                stopped_early = epoch < config.max_epochs;
                break;
            }
        }
    }

    net.theta = best_theta;
    Ok(FitResult {
        params: net.to_params(),
        epochs_run: val_hist.len(),
        train_loss_history: train_hist,
        val_loss_history: val_hist,
        stopped_early,
        initial_val_loss,
        best_epoch,
    })
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Mean squared prediction error of `params` on `data`.
pub fn predict_mse(params: &NetworkParams, data: &Dataset) -> Result<f64> {
    if params.inputs() != data.n_features() {
        return Err(Error::DimensionMismatch {
            context: "prediction features",
            expected: params.inputs(),
            found: data.n_features(),
        });
    }
    Ok(Flat::from_params(params).mse(data))
}
