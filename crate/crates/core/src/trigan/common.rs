use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::nn::{AdamConfig, BoundMlp, HiddenActivation, Mlp, MlpSpec, OutputActivation};
use crate::rng::{stream_rng, Stream};
use crate::scalar::Scalar;

use super::batch::Batch;

/// Discriminator probabilities are kept inside `[EPS, 1 - EPS]`.
pub const PROB_EPS: f64 = 1e-7;

/// Network widths and optimizer settings shared by both games.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ModelConfig {
    pub x_width: usize,
    pub y_width: usize,
    pub noise_width: usize,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub hidden_activation: HiddenActivation,
    pub adam: AdamConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            x_width: 1,
            y_width: 1,
            noise_width: 2,
            generator_hidden: vec![500; 4],
            discriminator_hidden: vec![500; 4],
            hidden_activation: HiddenActivation::Relu,
            adam: AdamConfig::default(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.x_width == 0 || self.y_width == 0 {
            return Err(Error::contract("model widths", "x and y widths must be positive"));
        }
        self.generator_x_spec().validate()?;
        self.generator_y_spec().validate()?;
        self.discriminator_spec().validate()?;
        self.adam.validate()
    }

    /// `(y ++ z) -> x`
    pub fn generator_x_spec(&self) -> MlpSpec {
        MlpSpec::new(
            self.y_width + self.noise_width,
            self.generator_hidden.clone(),
            self.x_width,
        )
        .with_hidden(self.hidden_activation)
    }

    /// `(x ++ z) -> y`
    pub fn generator_y_spec(&self) -> MlpSpec {
        MlpSpec::new(
            self.x_width + self.noise_width,
            self.generator_hidden.clone(),
            self.y_width,
        )
        .with_hidden(self.hidden_activation)
    }

    /// `(x ++ y) -> probability`
    pub fn discriminator_spec(&self) -> MlpSpec {
        MlpSpec::new(self.x_width + self.y_width, self.discriminator_hidden.clone(), 1)
            .with_hidden(self.hidden_activation)
            .with_output(OutputActivation::Sigmoid)
    }
}

/// Independent per-network seeds derived from one run seed.
pub(crate) fn sub_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = stream_rng(seed, Stream::Init);
    (0..n).map(|_| rng.next_u64()).collect()
}

pub(crate) fn logit_bound<T: Scalar>() -> T {
    let eps = T::lit(PROB_EPS);
    ((T::one() - eps) / eps).ln()
}

/// `log D` from discriminator logits, with `D` clamped to `[EPS, 1 - EPS]`.
pub(crate) fn log_prob<T: Scalar>(tape: &mut Tape<T>, logits: Var) -> Result<Var> {
    let b = logit_bound::<T>();
    let c = tape.clamp(logits, -b, b)?;
    tape.log_sigmoid(c)
}

/// `log(1 - D)` from discriminator logits, same clamp.
pub(crate) fn log_one_minus_prob<T: Scalar>(tape: &mut Tape<T>, logits: Var) -> Result<Var> {
    let b = logit_bound::<T>();
    let c = tape.clamp(logits, -b, b)?;
    let n = tape.neg(c)?;
    tape.log_sigmoid(n)
}

/// Batch mean of a column, as a `1 x 1` node.
pub(crate) fn mean<T: Scalar>(tape: &mut Tape<T>, column: Var) -> Result<Var> {
    tape.mean_over_batch(column)
}

/// `-(a + b + ...)`
pub(crate) fn neg_sum<T: Scalar>(tape: &mut Tape<T>, terms: &[Var]) -> Result<Var> {
    let mut acc = terms[0];
    for &t in &terms[1..] {
        acc = tape.add(acc, t)?;
    }
    tape.neg(acc)
}

/// Mean clamped probability for a column of logits.
pub(crate) fn mean_prob<T: Scalar>(tape: &Tape<T>, logits: Var) -> f64 {
    let b = logit_bound::<T>();
    let v = tape.value(logits);
    let s: f64 = v
        .iter()
        .map(|&l| crate::autodiff::sigmoid(l.max(-b).min(b)).to_f64().unwrap())
        .sum();
    s / v.len() as f64
}

/// Clamped `log D` and `log(1 - D)` of one logit, outside any tape.
pub(crate) fn log_probs<T: Scalar>(logit: T) -> (f64, f64) {
    let b = logit_bound::<T>();
    let c = logit.max(-b).min(b);
    (
        crate::autodiff::log_sigmoid(c).to_f64().unwrap(),
        crate::autodiff::log_sigmoid(-c).to_f64().unwrap(),
    )
}

pub(crate) fn item<T: Scalar>(tape: &Tape<T>, v: Var) -> f64 {
    tape.value(v)[0].to_f64().unwrap()
}

/// Leaves and generator outputs for the two fake-pair directions.
pub(crate) struct FakePairs {
    /// `(x~, y)` with `x~ = G_x(y, z)`
    pub x_fake: Var,
    /// `(x, y~)` with `y~ = G_y(x, z)`
    pub y_fake: Var,
}

pub(crate) fn fake_pairs<T: Scalar>(
    tape: &mut Tape<T>,
    gen_x: (&Mlp<T>, &BoundMlp),
    gen_y: (&Mlp<T>, &BoundMlp),
    batch: &Batch<T>,
) -> Result<FakePairs> {
    let uy = tape.constant(batch.unpaired_y.clone());
    let zx = tape.constant(batch.noise_x.clone());
    let input_x = tape.concat(uy, zx)?;
    let x_tilde = gen_x.0.forward(tape, gen_x.1, input_x)?;
    let x_fake = tape.concat(x_tilde, uy)?;

    let ux = tape.constant(batch.unpaired_x.clone());
    let zy = tape.constant(batch.noise_y.clone());
    let input_y = tape.concat(ux, zy)?;
    let y_tilde = gen_y.0.forward(tape, gen_y.1, input_y)?;
    let y_fake = tape.concat(ux, y_tilde)?;
    Ok(FakePairs { x_fake, y_fake })
}

pub(crate) fn real_pairs<T: Scalar>(tape: &mut Tape<T>, batch: &Batch<T>) -> Result<Var> {
    let px = tape.constant(batch.paired_x.clone());
    let py = tape.constant(batch.paired_y.clone());
    tape.concat(px, py)
}

/// Generator outputs for given conditioning rows and noise, no gradients.
pub fn generate<T: Scalar>(gen: &Mlp<T>, condition: &Tensor<T>, noise: &Tensor<T>) -> Result<Tensor<T>> {
    let mut tape = Tape::new();
    let bound = gen.bind(&mut tape, false);
    let c = tape.constant(condition.clone());
    let z = tape.constant(noise.clone());
    let input = tape.concat(c, z)?;
    let out = gen.forward(&mut tape, &bound, input)?;
    Ok(tape.tensor(out).clone())
}

/// Fails if any accumulated gradient is non-finite, so a step can be
/// abandoned before either optimizer moves.
pub(crate) fn ensure_finite_grads<T: Scalar>(context: &str, nets: &[(&str, &Mlp<T>)]) -> Result<()> {
    for (name, net) in nets {
        for (i, p) in net.params().iter().enumerate() {
            if p.grad().iter().any(|g| !g.is_finite()) {
                return Err(Error::numeric(
                    context,
                    format!("{name} parameter {i} has a non-finite gradient"),
                ));
            }
        }
    }
    Ok(())
}

pub(crate) fn ensure_finite(context: &str, values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !v.is_finite() {
            return Err(Error::numeric(context, format!("{name} is {v}")));
        }
    }
    Ok(())
}
