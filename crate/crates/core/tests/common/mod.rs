#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trigan_core::autodiff::{gradient_check, Tape, Tensor, Var, DEFAULT_STEP};
use trigan_core::nn::{BoundMlp, HiddenActivation};
use trigan_core::trigan::{gaussian_noise, Batch, DeltaBindings, ModelConfig, TriGanModel};
use trigan_core::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    MatMul,
    Add,
    AddBias,
    Sub,
    Mul,
    Neg,
    Relu,
    LeakyRelu,
    Tanh,
    Sigmoid,
    Log,
    LogSigmoid,
    MeanOverBatch,
    Sum,
    Concat,
    Clamp,
    Affine,
}

pub const ALL_OPS: [Op; 17] = [
    Op::MatMul,
    Op::Add,
    Op::AddBias,
    Op::Sub,
    Op::Mul,
    Op::Neg,
    Op::Relu,
    Op::LeakyRelu,
    Op::Tanh,
    Op::Sigmoid,
    Op::Log,
    Op::LogSigmoid,
    Op::MeanOverBatch,
    Op::Sum,
    Op::Concat,
    Op::Clamp,
    Op::Affine,
];

const CLAMP: f64 = 0.5;

/// Uniform in `[-2, 2]`, kept at least 0.05 away from every kink used
/// below (0 and the clamp bounds).
fn smooth_value(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.random_range(-2.0..2.0);
        if v.abs() > 0.05 && (v.abs() - CLAMP).abs() > 0.05 {
            return v;
        }
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, positive: bool) -> Tensor<f64> {
    let v = (0..rows * cols)
        .map(|_| {
            if positive {
                rng.random_range(0.2..3.0)
            } else {
                smooth_value(rng)
            }
        })
        .collect();
    Tensor::matrix(rows, cols, v).unwrap()
}

/// Max relative gradient error of one primitive on a random configuration.
/// The op output is reduced by a fixed random weighting so every output
/// entry has a distinct upstream gradient.
pub fn op_gradient_error(op: Op, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = rng.random_range(1..6);
    let c = rng.random_range(1..6);
    let k = rng.random_range(1..6);
    let inputs: Vec<Tensor<f64>> = match op {
        Op::MatMul => vec![
            random_matrix(&mut rng, r, k, false),
            random_matrix(&mut rng, k, c, false),
        ],
        Op::Add | Op::Sub | Op::Mul => vec![
            random_matrix(&mut rng, r, c, false),
            random_matrix(&mut rng, r, c, false),
        ],
        Op::AddBias => vec![
            random_matrix(&mut rng, r, c, false),
            random_matrix(&mut rng, 1, c, false),
        ],
        Op::Concat => vec![
            random_matrix(&mut rng, r, c, false),
            random_matrix(&mut rng, r, k, false),
        ],
        Op::Log => vec![random_matrix(&mut rng, r, c, true)],
        _ => vec![random_matrix(&mut rng, r, c, false)],
    };
    let slope = rng.random_range(0.01..0.5);
    let scale = rng.random_range(-2.0..2.0);
    let shift = rng.random_range(-1.0..1.0);
    let out_cols = match op {
        Op::Concat => c + k,
        _ => c,
    };
    let out_rows = match op {
        Op::MeanOverBatch | Op::Sum => 1,
        _ => r,
    };
    let out_cols = if op == Op::Sum { 1 } else { out_cols };
    let weights = random_matrix(&mut rng, out_rows, out_cols, false);

    let f = |tape: &mut Tape<f64>, v: &[Var]| -> Result<Var> {
        let out = match op {
            Op::MatMul => tape.matmul(v[0], v[1])?,
            Op::Add | Op::AddBias => tape.add(v[0], v[1])?,
            Op::Sub => tape.sub(v[0], v[1])?,
            Op::Mul => tape.mul(v[0], v[1])?,
            Op::Concat => tape.concat(v[0], v[1])?,
            Op::Neg => tape.neg(v[0])?,
            Op::Relu => tape.relu(v[0])?,
            Op::LeakyRelu => tape.leaky_relu(v[0], slope)?,
            Op::Tanh => tape.tanh(v[0])?,
            Op::Sigmoid => tape.sigmoid(v[0])?,
            Op::Log => tape.log(v[0])?,
            Op::LogSigmoid => tape.log_sigmoid(v[0])?,
            Op::MeanOverBatch => tape.mean_over_batch(v[0])?,
            Op::Sum => tape.sum(v[0])?,
            Op::Clamp => tape.clamp(v[0], -CLAMP, CLAMP)?,
            Op::Affine => tape.affine(v[0], scale, shift)?,
        };
        let w = tape.constant(weights.clone());
        let weighted = tape.mul(out, w)?;
        tape.sum(weighted)
    };
    gradient_check(f, &inputs, DEFAULT_STEP)
}

pub fn random_batch(rng: &mut ChaCha8Rng, m: usize, noise: usize) -> Batch<f64> {
    Batch::new(
        gaussian_noise(m, 1, rng),
        gaussian_noise(m, 1, rng),
        gaussian_noise(m, 1, rng),
        gaussian_noise(m, 1, rng),
        gaussian_noise(m, noise, rng),
        gaussian_noise(m, noise, rng),
    )
    .unwrap()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Composed {
    Discriminators,
    Generators,
}

/// Gradient check of `L_d1 + L_d2` or `L_g1 + L_g2` with respect to every
/// parameter of all four networks, on a random small model and batch.
pub fn composed_gradient_error(which: Composed, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = rng.random_range(2..7);
    let depth = rng.random_range(1..3);
    let noise = rng.random_range(1..4);
    let m = rng.random_range(2..7);
    let config = ModelConfig {
        noise_width: noise,
        generator_hidden: vec![width; depth],
        discriminator_hidden: vec![width; depth],
        hidden_activation: HiddenActivation::Tanh,
        ..ModelConfig::default()
    };
    let model = TriGanModel::<f64>::new(config, rng.random())?;
    let batch = random_batch(&mut rng, m, noise);
    let nets = [model.gen_x(), model.gen_y(), model.disc1(), model.disc2()];
    let params: Vec<Tensor<f64>> = nets.iter().flat_map(|n| n.params().iter().cloned()).collect();
    let sizes: Vec<usize> = nets.iter().map(|n| n.params().len()).collect();

    let f = |tape: &mut Tape<f64>, v: &[Var]| -> Result<Var> {
        let mut start = 0;
        let mut bound = sizes.iter().map(|&n| {
            let b = BoundMlp::from_vars(v[start..start + n].to_vec());
            start += n;
            b
        });
        let b = DeltaBindings {
            gen_x: bound.next().unwrap(),
            gen_y: bound.next().unwrap(),
            disc1: bound.next().unwrap(),
            disc2: bound.next().unwrap(),
        };
        Ok(match which {
            Composed::Discriminators => model.discriminator_graph(tape, &b, &batch)?.total,
            Composed::Generators => model.generator_graph(tape, &b, &batch)?.total,
        })
    };
    gradient_check(f, &params, DEFAULT_STEP)
}
