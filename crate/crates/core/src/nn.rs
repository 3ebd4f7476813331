//! Single-hidden-layer sigmoid network: `b0 + Σ_k b_k σ(a_{0,k} + a_k·x)`.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Weights of the network. `weights_hidden` is K × d, one row per hidden unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub bias_out: f64,
    pub weights_out: Array1<f64>,
    pub bias_hidden: Array1<f64>,
    pub weights_hidden: Array2<f64>,
}

impl NetworkParams {
    pub fn new(
        bias_out: f64,
        weights_out: Array1<f64>,
        bias_hidden: Array1<f64>,
        weights_hidden: Array2<f64>,
    ) -> Result<Self> {
        let (k, d) = weights_hidden.dim();
        if k == 0 || d == 0 {
            return Err(Error::Empty("network needs at least one hidden unit and one input"));
        }
        for (context, len) in [("output weights", weights_out.len()), ("hidden biases", bias_hidden.len())] {
            if len != k {
                return Err(Error::DimensionMismatch { context, expected: k, found: len });
            }
        }
        let params = Self {
            bias_out,
            weights_out,
            bias_hidden,
            weights_hidden: weights_hidden.as_standard_layout().into_owned(),
        };
        if !params.is_finite() {
            return Err(Error::NonFinite("network parameters"));
        }
        Ok(params)
    }

    /// All-zero network with the given shape.
    pub fn zeros(hidden_units: usize, inputs: usize) -> Self {
        Self {
            bias_out: 0.0,
            weights_out: Array1::zeros(hidden_units),
            bias_hidden: Array1::zeros(hidden_units),
            weights_hidden: Array2::zeros((hidden_units, inputs)),
        }
    }

    /// Glorot-normal draw for every parameter (biases included), truncated at ±2 std.
    pub fn random_glorot<R: Rng + ?Sized>(hidden_units: usize, inputs: usize, rng: &mut R) -> Self {
        let hidden_std = glorot_std(inputs, hidden_units);
        let out_std = glorot_std(hidden_units, 1);
        let weights_hidden =
            Array2::from_shape_simple_fn((hidden_units, inputs), || truncated_normal(rng, hidden_std));
        let bias_hidden = Array1::from_shape_simple_fn(hidden_units, || truncated_normal(rng, hidden_std));
        let weights_out = Array1::from_shape_simple_fn(hidden_units, || truncated_normal(rng, out_std));
        let bias_out = truncated_normal(rng, out_std);
        Self { bias_out, weights_out, bias_hidden, weights_hidden }
    }

    /// Training initialisation: Glorot-normal weights, zero biases.
    pub fn training_init<R: Rng + ?Sized>(hidden_units: usize, inputs: usize, rng: &mut R) -> Self {
        let mut p = Self::random_glorot(hidden_units, inputs, rng);
        p.bias_hidden.fill(0.0);
        p.bias_out = 0.0;
        p
    }

    pub fn hidden_units(&self) -> usize {
        self.weights_hidden.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.weights_hidden.ncols()
    }

    pub fn parameter_count(&self) -> usize {
        1 + self.hidden_units() * (self.inputs() + 2)
    }

    pub fn is_finite(&self) -> bool {
        self.bias_out.is_finite()
            && self.weights_out.iter().all(|v| v.is_finite())
            && self.bias_hidden.iter().all(|v| v.is_finite())
            && self.weights_hidden.iter().all(|v| v.is_finite())
    }

    /// Σ|θ| over every parameter.
    pub fn l1_norm(&self) -> f64 {
        self.bias_out.abs()
            + self.weights_out.iter().map(|v| v.abs()).sum::<f64>()
            + self.bias_hidden.iter().map(|v| v.abs()).sum::<f64>()
            + self.weights_hidden.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn check_input(&self, len: usize) -> Result<()> {
        if len != self.inputs() {
            return Err(Error::DimensionMismatch {
                context: "network input",
                expected: self.inputs(),
                found: len,
            });
        }
        Ok(())
    }

    #[inline]
    fn hidden_rows(&self) -> &[f64] {
        self.weights_hidden.as_slice().expect("standard layout")
    }

    /// Network output at `x`. Panics on length mismatch; see [`forward`] for the checked form.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.inputs());
        let d = self.inputs();
        let a = self.hidden_rows();
        let mut out = self.bias_out;
        for k in 0..self.hidden_units() {
            let z = self.bias_hidden[k] + dot(&a[k * d..(k + 1) * d], x);
            out += self.weights_out[k] * sigmoid(z);
        }
        out
    }

    /// Writes ∂f/∂x into `grad` and returns f(x). Panics on length mismatch.
    pub fn eval_with_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        debug_assert_eq!(x.len(), self.inputs());
        let d = self.inputs();
        let a = self.hidden_rows();
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut out = self.bias_out;
        for k in 0..self.hidden_units() {
            let row = &a[k * d..(k + 1) * d];
            let s = sigmoid(self.bias_hidden[k] + dot(row, x));
            let b = self.weights_out[k];
            out += b * s;
            let coef = b * s * (1.0 - s);
            for (g, w) in grad.iter_mut().zip(row) {
                *g += coef * w;
            }
        }
        out
    }

    /// Writes ∂f/∂x into `grad`. Panics on length mismatch.
    pub fn gradient_into(&self, x: &[f64], grad: &mut [f64]) {
        self.eval_with_gradient(x, grad);
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

pub fn glorot_std(fan_in: usize, fan_out: usize) -> f64 {
    (2.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Normal(0, std²) conditioned on |z| ≤ 2 std.
pub fn truncated_normal<R: Rng + ?Sized>(rng: &mut R, std: f64) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if z.abs() <= 2.0 {
            return z * std;
        }
    }
}

fn as_slice_or_copy<'a>(x: &'a ArrayView1<'a, f64>, buf: &'a mut Vec<f64>) -> &'a [f64] {
    match x.as_slice() {
        Some(s) => s,
        None => {
            buf.clear();
            buf.extend(x.iter().copied());
            buf
        }
    }
}

/// Network output at `x`.
pub fn forward(params: &NetworkParams, x: ArrayView1<'_, f64>) -> Result<f64> {
    params.check_input(x.len())?;
    let mut buf = Vec::new();
    Ok(params.eval(as_slice_or_copy(&x, &mut buf)))
}

/// Analytic gradient of the network output with respect to its inputs.
pub fn input_gradient(params: &NetworkParams, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    params.check_input(x.len())?;
    let mut buf = Vec::new();
    let mut grad = vec![0.0; params.inputs()];
    params.gradient_into(as_slice_or_copy(&x, &mut buf), &mut grad);
    Ok(Array1::from(grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use ndarray::{array, Axis};
    use rand::seq::SliceRandom;

    fn single_unit(b0: f64, b1: f64, a0: f64, a: Array1<f64>) -> NetworkParams {
        let d = a.len();
        NetworkParams::new(b0, array![b1], array![a0], a.into_shape_with_order((1, d)).unwrap()).unwrap()
    }

    #[test]
    fn zero_network_outputs_bias() {
        let mut p = NetworkParams::zeros(3, 2);
        p.bias_out = 3.5;
        assert_eq!(forward(&p, array![0.3, -7.0].view()).unwrap(), 3.5);
    }

    #[test]
    fn sigmoid_at_zero_is_half() {
        let p = single_unit(0.0, 2.0, 0.0, array![0.0, 0.0]);
        assert_eq!(forward(&p, array![5.0, -1.0].view()).unwrap(), 1.0);
    }

    #[test]
    fn hand_evaluated_output() {
        let p = single_unit(1.0, 1.0, 0.0, array![1.0, 0.0]);
        let y = forward(&p, array![3f64.ln(), 9.0].view()).unwrap();
        assert!((y - 1.75).abs() < 1e-15);
    }

    #[test]
    fn gradient_of_constant_network_is_zero() {
        let mut rng = substream(1, 0);
        let mut p = NetworkParams::random_glorot(4, 3, &mut rng);
        p.weights_out.fill(0.0);
        let g = input_gradient(&p, array![0.1, 0.2, 0.3].view()).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gradient_at_sigmoid_midpoint() {
        let p = single_unit(0.0, 4.0, 0.0, array![1.0, 0.0]);
        let g = input_gradient(&p, array![0.0, 0.0].view()).unwrap();
        assert_eq!(g, array![1.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = NetworkParams::zeros(2, 3);
        assert!(matches!(forward(&p, array![1.0].view()), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            input_gradient(&p, array![1.0, 2.0].view()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constructor_rejects_bad_shapes_and_nan() {
        assert!(NetworkParams::new(0.0, array![1.0, 2.0], array![0.0], Array2::zeros((1, 2))).is_err());
        assert!(NetworkParams::new(f64::NAN, array![1.0], array![0.0], Array2::zeros((1, 2))).is_err());
        assert!(NetworkParams::new(0.0, array![], array![], Array2::zeros((0, 2))).is_err());
    }

    #[test]
    fn hidden_unit_permutation_leaves_output_unchanged() {
        let mut rng = substream(5, 1);
        for _ in 0..20 {
            let p = NetworkParams::random_glorot(7, 4, &mut rng);
            let mut perm: Vec<usize> = (0..7).collect();
            perm.shuffle(&mut rng);
            let q = NetworkParams::new(
                p.bias_out,
                p.weights_out.select(Axis(0), &perm),
                p.bias_hidden.select(Axis(0), &perm),
                p.weights_hidden.select(Axis(0), &perm),
            )
            .unwrap();
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            assert!((p.eval(&x) - q.eval(&x)).abs() <= 1e-12);
        }
    }

    #[test]
    fn glorot_draws_respect_truncation() {
        let mut rng = substream(2, 2);
        let p = NetworkParams::random_glorot(25, 8, &mut rng);
        let bound = 2.0 * glorot_std(8, 25);
        assert!(p.weights_hidden.iter().all(|w| w.abs() <= bound));
        let q = NetworkParams::training_init(25, 8, &mut rng);
        assert!(q.bias_hidden.iter().all(|b| *b == 0.0));
    }
}
