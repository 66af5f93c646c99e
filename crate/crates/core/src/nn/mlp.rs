use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Negative-side slope used by [`HiddenActivation::LeakyRelu`].
pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HiddenActivation {
    Relu,
    LeakyRelu,
    Tanh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputActivation {
    Identity,
    Sigmoid,
    Tanh,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input_width: usize,
    pub hidden_widths: Vec<usize>,
    pub output_width: usize,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
}

impl MlpSpec {
    pub fn new(input_width: usize, hidden_widths: Vec<usize>, output_width: usize) -> Self {
        MlpSpec {
            input_width,
            hidden_widths,
            output_width,
            hidden_activation: HiddenActivation::Relu,
            output_activation: OutputActivation::Identity,
        }
    }

    pub fn with_hidden(mut self, act: HiddenActivation) -> Self {
        self.hidden_activation = act;
        self
    }

    pub fn with_output(mut self, act: OutputActivation) -> Self {
        self.output_activation = act;
        self
    }

    /// Input width, every hidden width, output width.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden_widths.len() + 2);
        w.push(self.input_width);
        w.extend_from_slice(&self.hidden_widths);
        w.push(self.output_width);
        w
    }

    pub fn layer_count(&self) -> usize {
        self.hidden_widths.len() + 1
    }

    pub fn parameter_count(&self) -> usize {
        self.widths().windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(pos) = self.widths().iter().position(|&w| w == 0) {
            return Err(Error::contract(
                "mlp widths",
                format!("width at position {pos} is zero"),
            ));
        }
        Ok(())
    }
}

/// Tape handles for one network's parameters, valid for the tape that
/// produced them.
#[derive(Clone, Debug)]
pub struct BoundMlp {
    vars: Vec<Var>,
}

impl BoundMlp {
    /// Wraps handles created elsewhere, e.g. leaves owned by a gradient check.
    /// They must follow the `[W_0, b_0, ...]` layout of the target network.
    pub fn from_vars(vars: Vec<Var>) -> Self {
        BoundMlp { vars }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}

/// Fully connected network. Parameters are stored as
/// `[W_0, b_0, W_1, b_1, ...]` with `W_i: (width_i, width_{i+1})` and
/// `b_i: (1, width_{i+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T> {
    spec: MlpSpec,
    params: Vec<Tensor<T>>,
}

impl<T: Scalar> Mlp<T> {
    /// Glorot-uniform weights, zero biases.
    pub fn init(spec: MlpSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(2 * spec.layer_count());
        for w in spec.widths().windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let values = (0..fan_in * fan_out)
                .map(|_| T::lit(rng.random_range(-bound..=bound)))
                .collect();
            params.push(Tensor::matrix(fan_in, fan_out, values)?);
            params.push(Tensor::zeros(vec![1, fan_out]));
        }
        Ok(Mlp { spec, params })
    }

    /// Rebuilds a network from explicit parameter tensors, checking every
    /// shape against `spec`.
    pub fn from_params(spec: MlpSpec, params: Vec<Tensor<T>>) -> Result<Self> {
        spec.validate()?;
        let widths = spec.widths();
        if params.len() != 2 * spec.layer_count() {
            return Err(Error::contract(
                "mlp parameters",
                format!("expected {} tensors, got {}", 2 * spec.layer_count(), params.len()),
            ));
        }
        for (i, w) in widths.windows(2).enumerate() {
            let expect_w = [w[0], w[1]];
            let expect_b = [1, w[1]];
            for (t, expect) in [(&params[2 * i], &expect_w), (&params[2 * i + 1], &expect_b)] {
                if t.shape() != expect {
                    return Err(Error::Shape {
                        op: "mlp parameters",
                        left: t.shape().to_vec(),
                        right: expect.to_vec(),
                    });
                }
            }
        }
        Ok(Mlp { spec, params })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn params(&self) -> &[Tensor<T>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.params
    }

    pub fn parameter_count(&self) -> usize {
        self.params.iter().map(Tensor::numel).sum()
    }

    pub fn zero_grad(&mut self) {
        self.params.iter_mut().for_each(Tensor::zero_grad);
    }

    /// Records the parameters on `tape`. Frozen bindings are constants, so a
    /// backward pass spends no work on them.
    pub fn bind(&self, tape: &mut Tape<T>, trainable: bool) -> BoundMlp {
        let vars = self.params.iter().map(|p| tape.leaf(p.clone(), trainable)).collect();
        BoundMlp { vars }
    }

    /// Pre-activation of the output layer.
    pub fn forward_logits(&self, tape: &mut Tape<T>, bound: &BoundMlp, input: Var) -> Result<Var> {
        let width = tape.tensor(input).shape().get(1).copied().unwrap_or(0);
        if tape.tensor(input).shape().len() != 2 || width != self.spec.input_width {
            return Err(Error::Shape {
                op: "mlp_forward",
                left: tape.tensor(input).shape().to_vec(),
                right: vec![0, self.spec.input_width],
            });
        }
        let layers = self.spec.layer_count();
        let mut h = input;
        for layer in 0..layers {
            let z = tape.matmul(h, bound.vars[2 * layer])?;
            h = tape.add(z, bound.vars[2 * layer + 1])?;
            if layer + 1 < layers {
                h = match self.spec.hidden_activation {
                    HiddenActivation::Relu => tape.relu(h)?,
                    HiddenActivation::LeakyRelu => tape.leaky_relu(h, T::lit(LEAKY_SLOPE))?,
                    HiddenActivation::Tanh => tape.tanh(h)?,
                };
            }
        }
        Ok(h)
    }

    pub fn forward(&self, tape: &mut Tape<T>, bound: &BoundMlp, input: Var) -> Result<Var> {
        let out = self.forward_logits(tape, bound, input)?;
        match self.spec.output_activation {
            OutputActivation::Identity => Ok(out),
            OutputActivation::Sigmoid => tape.sigmoid(out),
            OutputActivation::Tanh => tape.tanh(out),
        }
    }

    /// Forward pass on a scratch tape; no gradients are kept.
    pub fn predict(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape, false);
        let x = tape.constant(input.clone());
        let y = self.forward(&mut tape, &bound, x)?;
        Ok(tape.tensor(y).clone())
    }

    /// Adds the tape gradients of a trainable binding into the parameter
    /// accumulators.
    pub fn accumulate_grads(&mut self, tape: &Tape<T>, bound: &BoundMlp) {
        for (p, v) in self.params.iter_mut().zip(&bound.vars) {
            for (acc, g) in p.grad_mut().iter_mut().zip(tape.grad(*v)) {
                *acc += *g;
            }
        }
    }
}
