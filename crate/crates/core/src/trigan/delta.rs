//! The two-generator, two-discriminator joint-matching game.
//!
//! `D1` separates real pairs from both kinds of fake pair; `D2` separates
//! `(x~, y)` pairs (produced by `G_x`) from `(x, y~)` pairs (produced by
//! `G_y`). Discriminator losses:
//!
//! ```text
//! L_d1 = -mean log r11 - mean log(1 - r12) - mean log(1 - r13)
//! L_d2 = -mean log r21 - mean log(1 - r22)
//! ```
//!
//! Generator losses (non-saturating form):
//!
//! ```text
//! L_g1 = -mean log r12 - mean log(1 - r21)
//! L_g2 = -mean log r13 - mean log r22
//! ```
//!
//! with `r11 = D1(real)`, `r12 = D1(x~, y)`, `r13 = D1(x, y~)`,
//! `r21 = D2(x~, y)`, `r22 = D2(x, y~)`.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::nn::{AdamState, BoundMlp, Checkpoint, Mlp, NetworkRecord};
use crate::scalar::Scalar;

use super::batch::Batch;
use super::common::{
    ensure_finite, ensure_finite_grads, fake_pairs, item, log_one_minus_prob, log_prob, log_probs, mean, mean_prob,
    neg_sum, real_pairs, sub_seeds, ModelConfig,
};

/// Losses and mean discriminator outputs for one batch. Fields not computed
/// by a given call are `NaN`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub l_d1: f64,
    pub l_d2: f64,
    pub l_g1: f64,
    pub l_g2: f64,
    pub rho11: f64,
    pub rho12: f64,
    pub rho13: f64,
    pub rho21: f64,
    pub rho22: f64,
}

impl LossReport {
    fn empty() -> Self {
        LossReport {
            l_d1: f64::NAN,
            l_d2: f64::NAN,
            l_g1: f64::NAN,
            l_g2: f64::NAN,
            rho11: f64::NAN,
            rho12: f64::NAN,
            rho13: f64::NAN,
            rho21: f64::NAN,
            rho22: f64::NAN,
        }
    }

    /// `-(L_d1 + L_d2)`, the game value on the batch.
    pub fn value(&self) -> f64 {
        -(self.l_d1 + self.l_d2)
    }
}

/// Graph nodes of the discriminator-side losses.
pub struct DiscriminatorGraph {
    pub l_d1: Var,
    pub l_d2: Var,
    pub total: Var,
    logits: [Var; 5],
}

/// Graph nodes of the generator-side losses.
pub struct GeneratorGraph {
    pub l_g1: Var,
    pub l_g2: Var,
    pub total: Var,
    logits: [Var; 4],
}

/// Tape bindings for all four networks.
pub struct DeltaBindings {
    pub gen_x: BoundMlp,
    pub gen_y: BoundMlp,
    pub disc1: BoundMlp,
    pub disc2: BoundMlp,
}

pub struct TriGanModel<T> {
    config: ModelConfig,
    gen_x: Mlp<T>,
    gen_y: Mlp<T>,
    disc1: Mlp<T>,
    disc2: Mlp<T>,
    opt_g: AdamState<T>,
    opt_d: AdamState<T>,
}

impl<T: Scalar> TriGanModel<T> {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let s = sub_seeds(seed, 4);
        let gen_x = Mlp::init(config.generator_x_spec(), s[0])?;
        let gen_y = Mlp::init(config.generator_y_spec(), s[1])?;
        let disc1 = Mlp::init(config.discriminator_spec(), s[2])?;
        let disc2 = Mlp::init(config.discriminator_spec(), s[3])?;
        Self::from_networks(config, gen_x, gen_y, disc1, disc2)
    }

    pub fn from_networks(
        config: ModelConfig,
        gen_x: Mlp<T>,
        gen_y: Mlp<T>,
        disc1: Mlp<T>,
        disc2: Mlp<T>,
    ) -> Result<Self> {
        config.validate()?;
        let expect = [
            (&gen_x, config.generator_x_spec(), "gen_x"),
            (&gen_y, config.generator_y_spec(), "gen_y"),
            (&disc1, config.discriminator_spec(), "disc1"),
            (&disc2, config.discriminator_spec(), "disc2"),
        ];
        for (net, spec, name) in expect {
            if net.spec() != &spec {
                return Err(Error::contract(
                    name,
                    format!("spec {:?} does not match config", net.spec()),
                ));
            }
        }
        Ok(TriGanModel {
            opt_g: AdamState::new(config.adam),
            opt_d: AdamState::new(config.adam),
            config,
            gen_x,
            gen_y,
            disc1,
            disc2,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn gen_x(&self) -> &Mlp<T> {
        &self.gen_x
    }
    pub fn gen_y(&self) -> &Mlp<T> {
        &self.gen_y
    }
    pub fn disc1(&self) -> &Mlp<T> {
        &self.disc1
    }
    pub fn disc2(&self) -> &Mlp<T> {
        &self.disc2
    }
    pub fn gen_x_mut(&mut self) -> &mut Mlp<T> {
        &mut self.gen_x
    }
    pub fn gen_y_mut(&mut self) -> &mut Mlp<T> {
        &mut self.gen_y
    }
    pub fn disc1_mut(&mut self) -> &mut Mlp<T> {
        &mut self.disc1
    }
    pub fn disc2_mut(&mut self) -> &mut Mlp<T> {
        &mut self.disc2
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.opt_g.set_lr(lr);
        self.opt_d.set_lr(lr);
    }

    pub fn bind(&self, tape: &mut Tape<T>, train_generators: bool, train_discriminators: bool) -> DeltaBindings {
        DeltaBindings {
            gen_x: self.gen_x.bind(tape, train_generators),
            gen_y: self.gen_y.bind(tape, train_generators),
            disc1: self.disc1.bind(tape, train_discriminators),
            disc2: self.disc2.bind(tape, train_discriminators),
        }
    }

    /// Builds `L_d1`, `L_d2` on `tape`. With frozen generator bindings the
    /// fake pairs are constants.
    pub fn discriminator_graph(
        &self,
        tape: &mut Tape<T>,
        b: &DeltaBindings,
        batch: &Batch<T>,
    ) -> Result<DiscriminatorGraph> {
        let fakes = fake_pairs(tape, (&self.gen_x, &b.gen_x), (&self.gen_y, &b.gen_y), batch)?;
        let real = real_pairs(tape, batch)?;
        let l11 = self.disc1.forward_logits(tape, &b.disc1, real)?;
        let l12 = self.disc1.forward_logits(tape, &b.disc1, fakes.x_fake)?;
        let l13 = self.disc1.forward_logits(tape, &b.disc1, fakes.y_fake)?;
        let l21 = self.disc2.forward_logits(tape, &b.disc2, fakes.x_fake)?;
        let l22 = self.disc2.forward_logits(tape, &b.disc2, fakes.y_fake)?;

        let t = log_prob(tape, l11)?;
        let a = mean(tape, t)?;
        let t = log_one_minus_prob(tape, l12)?;
        let bb = mean(tape, t)?;
        let t = log_one_minus_prob(tape, l13)?;
        let c = mean(tape, t)?;
        let l_d1 = neg_sum(tape, &[a, bb, c])?;

        let t = log_prob(tape, l21)?;
        let a = mean(tape, t)?;
        let t = log_one_minus_prob(tape, l22)?;
        let bb = mean(tape, t)?;
        let l_d2 = neg_sum(tape, &[a, bb])?;

        let total = tape.add(l_d1, l_d2)?;
        Ok(DiscriminatorGraph {
            l_d1,
            l_d2,
            total,
            logits: [l11, l12, l13, l21, l22],
        })
    }

    /// Builds `L_g1`, `L_g2` on `tape` with the fake pairs attached to the
    /// generator bindings.
    pub fn generator_graph(&self, tape: &mut Tape<T>, b: &DeltaBindings, batch: &Batch<T>) -> Result<GeneratorGraph> {
        let fakes = fake_pairs(tape, (&self.gen_x, &b.gen_x), (&self.gen_y, &b.gen_y), batch)?;
        let l12 = self.disc1.forward_logits(tape, &b.disc1, fakes.x_fake)?;
        let l13 = self.disc1.forward_logits(tape, &b.disc1, fakes.y_fake)?;
        let l21 = self.disc2.forward_logits(tape, &b.disc2, fakes.x_fake)?;
        let l22 = self.disc2.forward_logits(tape, &b.disc2, fakes.y_fake)?;

        let t = log_prob(tape, l12)?;
        let a = mean(tape, t)?;
        let t = log_one_minus_prob(tape, l21)?;
        let c = mean(tape, t)?;
        let l_g1 = neg_sum(tape, &[a, c])?;

        let t = log_prob(tape, l13)?;
        let a = mean(tape, t)?;
        let t = log_prob(tape, l22)?;
        let c = mean(tape, t)?;
        let l_g2 = neg_sum(tape, &[a, c])?;

        let total = tape.add(l_g1, l_g2)?;
        Ok(GeneratorGraph {
            l_g1,
            l_g2,
            total,
            logits: [l12, l13, l21, l22],
        })
    }

    fn fill_discriminator(report: &mut LossReport, tape: &Tape<T>, g: &DiscriminatorGraph) {
        report.l_d1 = item(tape, g.l_d1);
        report.l_d2 = item(tape, g.l_d2);
        let [l11, l12, l13, l21, l22] = g.logits;
        report.rho11 = mean_prob(tape, l11);
        report.rho12 = mean_prob(tape, l12);
        report.rho13 = mean_prob(tape, l13);
        report.rho21 = mean_prob(tape, l21);
        report.rho22 = mean_prob(tape, l22);
    }

    fn fill_generator(report: &mut LossReport, tape: &Tape<T>, g: &GeneratorGraph) {
        report.l_g1 = item(tape, g.l_g1);
        report.l_g2 = item(tape, g.l_g2);
        let [l12, l13, l21, l22] = g.logits;
        report.rho12 = mean_prob(tape, l12);
        report.rho13 = mean_prob(tape, l13);
        report.rho21 = mean_prob(tape, l21);
        report.rho22 = mean_prob(tape, l22);
    }

    /// `L_d1`, `L_d2` and all five mean discriminator outputs.
    pub fn discriminator_losses(&self, batch: &Batch<T>) -> Result<LossReport> {
        let mut tape = Tape::new();
        let b = self.bind(&mut tape, false, false);
        let g = self.discriminator_graph(&mut tape, &b, batch)?;
        let mut report = LossReport::empty();
        Self::fill_discriminator(&mut report, &tape, &g);
        ensure_finite("discriminator_losses", &[("L_d1", report.l_d1), ("L_d2", report.l_d2)])?;
        Ok(report)
    }

    /// `L_g1`, `L_g2` and the four fake-pair mean outputs.
    pub fn generator_losses(&self, batch: &Batch<T>) -> Result<LossReport> {
        let mut tape = Tape::new();
        let b = self.bind(&mut tape, false, false);
        let g = self.generator_graph(&mut tape, &b, batch)?;
        let mut report = LossReport::empty();
        Self::fill_generator(&mut report, &tape, &g);
        ensure_finite("generator_losses", &[("L_g1", report.l_g1), ("L_g2", report.l_g2)])?;
        Ok(report)
    }

    /// Adds `d(L_d1 + L_d2)/d theta_d` to the discriminator accumulators.
    fn discriminator_backward(&mut self, batch: &Batch<T>, report: &mut LossReport) -> Result<()> {
        let mut tape = Tape::new();
        let b = self.bind(&mut tape, false, true);
        let g = self.discriminator_graph(&mut tape, &b, batch)?;
        Self::fill_discriminator(report, &tape, &g);
        ensure_finite("discriminator update", &[("L_d1", report.l_d1), ("L_d2", report.l_d2)])?;
        tape.backward(g.total)?;
        self.disc1.accumulate_grads(&tape, &b.disc1);
        self.disc2.accumulate_grads(&tape, &b.disc2);
        Ok(())
    }

    /// Adds `d(L_g1 + L_g2)/d theta_g` to the generator accumulators.
    fn generator_backward(&mut self, batch: &Batch<T>, report: &mut LossReport) -> Result<()> {
        let mut tape = Tape::new();
        let b = self.bind(&mut tape, true, false);
        let g = self.generator_graph(&mut tape, &b, batch)?;
        let rho11 = report.rho11;
        Self::fill_generator(report, &tape, &g);
        report.rho11 = rho11;
        ensure_finite("generator update", &[("L_g1", report.l_g1), ("L_g2", report.l_g2)])?;
        tape.backward(g.total)?;
        self.gen_x.accumulate_grads(&tape, &b.gen_x);
        self.gen_y.accumulate_grads(&tape, &b.gen_y);
        Ok(())
    }

    fn step_discriminators(&mut self) -> Result<()> {
        let (d1, d2) = (&mut self.disc1, &mut self.disc2);
        let mut group: Vec<_> = d1.params_mut().iter_mut().chain(d2.params_mut().iter_mut()).collect();
        self.opt_d.step(&mut group)
    }

    fn step_generators(&mut self) -> Result<()> {
        let (gx, gy) = (&mut self.gen_x, &mut self.gen_y);
        let mut group: Vec<_> = gx.params_mut().iter_mut().chain(gy.params_mut().iter_mut()).collect();
        self.opt_g.step(&mut group)
    }

    fn zero_grad(&mut self) {
        for net in [&mut self.gen_x, &mut self.gen_y, &mut self.disc1, &mut self.disc2] {
            net.zero_grad();
        }
    }

    /// One discriminator-only update on `L_d1 + L_d2`.
    pub fn discriminator_step(&mut self, batch: &Batch<T>) -> Result<LossReport> {
        self.zero_grad();
        let mut report = LossReport::empty();
        self.discriminator_backward(batch, &mut report)?;
        self.step_discriminators()?;
        Ok(report)
    }

    /// One round of the alternating game. All four losses and both
    /// gradients are taken at the pre-update parameters; then `theta_d`
    /// moves on `L_d1 + L_d2` (fakes detached) and `theta_g` on
    /// `L_g1 + L_g2` (discriminators frozen). On error no parameter has
    /// moved.
    pub fn train_step(&mut self, batch: &Batch<T>) -> Result<LossReport> {
        self.zero_grad();
        let mut report = LossReport::empty();
        self.discriminator_backward(batch, &mut report)?;
        self.generator_backward(batch, &mut report)?;
        ensure_finite_grads(
            "train_step",
            &[
                ("gen_x", &self.gen_x),
                ("gen_y", &self.gen_y),
                ("disc1", &self.disc1),
                ("disc2", &self.disc2),
            ],
        )?;
        self.step_discriminators()?;
        self.step_generators()?;
        Ok(report)
    }

    /// Monte-Carlo estimate of the game value
    /// `E log D1(x, y) + E log((1 - D1) D2)(x~, y) + E log((1 - D1)(1 - D2))(x, y~)`
    /// on one batch, evaluated directly from discriminator outputs.
    pub fn value_function_estimate(&self, batch: &Batch<T>) -> Result<f64> {
        let mut tape = Tape::new();
        let b = self.bind(&mut tape, false, false);
        let fakes = fake_pairs(&mut tape, (&self.gen_x, &b.gen_x), (&self.gen_y, &b.gen_y), batch)?;
        let real = real_pairs(&mut tape, batch)?;
        let l11 = self.disc1.forward_logits(&mut tape, &b.disc1, real)?;
        let l12 = self.disc1.forward_logits(&mut tape, &b.disc1, fakes.x_fake)?;
        let l13 = self.disc1.forward_logits(&mut tape, &b.disc1, fakes.y_fake)?;
        let l21 = self.disc2.forward_logits(&mut tape, &b.disc2, fakes.x_fake)?;
        let l22 = self.disc2.forward_logits(&mut tape, &b.disc2, fakes.y_fake)?;
        let m = batch.rows() as f64;

        let real_term: f64 = tape.value(l11).iter().map(|&l| log_probs(l).0).sum::<f64>() / m;
        let x_term: f64 = tape
            .value(l12)
            .iter()
            .zip(tape.value(l21))
            .map(|(&a, &c)| log_probs(a).1 + log_probs(c).0)
            .sum::<f64>()
            / m;
        let y_term: f64 = tape
            .value(l13)
            .iter()
            .zip(tape.value(l22))
            .map(|(&a, &c)| log_probs(a).1 + log_probs(c).1)
            .sum::<f64>()
            / m;
        Ok(real_term + x_term + y_term)
    }

    pub fn checkpoint(&self) -> Result<Checkpoint> {
        let meta = serde_json::json!({
            "kind": "delta-gan",
            "model": self.config,
        });
        Ok(Checkpoint::new(
            meta,
            vec![
                NetworkRecord::from_mlp("gen_x", &self.gen_x)?,
                NetworkRecord::from_mlp("gen_y", &self.gen_y)?,
                NetworkRecord::from_mlp("disc1", &self.disc1)?,
                NetworkRecord::from_mlp("disc2", &self.disc2)?,
            ],
        ))
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let config: ModelConfig = serde_json::from_value(ckpt.meta["model"].clone())?;
        Self::from_networks(
            config,
            ckpt.network("gen_x")?.to_mlp()?,
            ckpt.network("gen_y")?.to_mlp()?,
            ckpt.network("disc1")?.to_mlp()?,
            ckpt.network("disc2")?.to_mlp()?,
        )
    }
}
