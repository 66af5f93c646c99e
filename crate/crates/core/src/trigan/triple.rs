//! Baseline with a single discriminator weighing the two fake directions by
//! `1 - alpha` and `alpha`:
//!
//! ```text
//! V = E log D(x, y) + (1 - alpha) E log(1 - D(x~, y)) + alpha E log(1 - D(x, y~))
//! ```
//!
//! Its equilibrium only pins the mixture `(1 - alpha) p_x + alpha p_y` to the
//! data joint, not each generator's joint separately.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::nn::{AdamState, Checkpoint, Mlp, NetworkRecord};
use crate::scalar::Scalar;

use super::batch::Batch;
use super::common::{
    ensure_finite, ensure_finite_grads, fake_pairs, item, log_one_minus_prob, log_prob, log_probs, mean, mean_prob,
    neg_sum, real_pairs, sub_seeds, ModelConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleGanSConfig {
    pub alpha: f64,
}

impl TripleGanSConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::contract("alpha", format!("{alpha} is outside (0, 1)")));
        }
        Ok(TripleGanSConfig { alpha })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleGanSReport {
    /// `-V`
    pub l_d: f64,
    /// `-(1 - alpha) mean log D(x~, y)`
    pub l_gx: f64,
    /// `-alpha mean log D(x, y~)`
    pub l_gy: f64,
    pub rho_real: f64,
    pub rho_fake_x: f64,
    pub rho_fake_y: f64,
}

impl TripleGanSReport {
    pub fn value(&self) -> f64 {
        -self.l_d
    }
}

pub struct TripleGanSModel<T> {
    config: ModelConfig,
    alpha: f64,
    gen_x: Mlp<T>,
    gen_y: Mlp<T>,
    disc: Mlp<T>,
    opt_g: AdamState<T>,
    opt_d: AdamState<T>,
}

impl<T: Scalar> TripleGanSModel<T> {
    /// Uses the same per-network seeds as the three-player model for the
    /// generators, so both games start from identical generators.
    pub fn new(config: ModelConfig, baseline: TripleGanSConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let s = sub_seeds(seed, 4);
        let gen_x = Mlp::init(config.generator_x_spec(), s[0])?;
        let gen_y = Mlp::init(config.generator_y_spec(), s[1])?;
        let disc = Mlp::init(config.discriminator_spec(), s[2])?;
        Self::from_networks(config, baseline, gen_x, gen_y, disc)
    }

    pub fn from_networks(
        config: ModelConfig,
        baseline: TripleGanSConfig,
        gen_x: Mlp<T>,
        gen_y: Mlp<T>,
        disc: Mlp<T>,
    ) -> Result<Self> {
        TripleGanSConfig::new(baseline.alpha)?;
        config.validate()?;
        for (net, spec, name) in [
            (&gen_x, config.generator_x_spec(), "gen_x"),
            (&gen_y, config.generator_y_spec(), "gen_y"),
            (&disc, config.discriminator_spec(), "disc"),
        ] {
            if net.spec() != &spec {
                return Err(Error::contract(name, "spec does not match config"));
            }
        }
        Ok(TripleGanSModel {
            opt_g: AdamState::new(config.adam),
            opt_d: AdamState::new(config.adam),
            alpha: baseline.alpha,
            config,
            gen_x,
            gen_y,
            disc,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gen_x(&self) -> &Mlp<T> {
        &self.gen_x
    }
    pub fn gen_y(&self) -> &Mlp<T> {
        &self.gen_y
    }
    pub fn disc(&self) -> &Mlp<T> {
        &self.disc
    }
    pub fn disc_mut(&mut self) -> &mut Mlp<T> {
        &mut self.disc
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.opt_g.set_lr(lr);
        self.opt_d.set_lr(lr);
    }

    /// Builds both losses on one tape and, when `train` is given, back-propagates
    /// into the chosen side.
    fn run(&mut self, batch: &Batch<T>, train: Option<Side>) -> Result<TripleGanSReport> {
        let (train_g, train_d) = match train {
            Some(Side::Generators) => (true, false),
            Some(Side::Discriminator) => (false, true),
            None => (false, false),
        };
        let a = T::lit(self.alpha);
        let one_minus_a = T::one() - a;
        let mut tape = Tape::new();
        let bgx = self.gen_x.bind(&mut tape, train_g);
        let bgy = self.gen_y.bind(&mut tape, train_g);
        let bd = self.disc.bind(&mut tape, train_d);
        let fakes = fake_pairs(&mut tape, (&self.gen_x, &bgx), (&self.gen_y, &bgy), batch)?;
        let real = real_pairs(&mut tape, batch)?;
        let l_real = self.disc.forward_logits(&mut tape, &bd, real)?;
        let l_fx = self.disc.forward_logits(&mut tape, &bd, fakes.x_fake)?;
        let l_fy = self.disc.forward_logits(&mut tape, &bd, fakes.y_fake)?;

        let t = log_prob(&mut tape, l_real)?;
        let r = mean(&mut tape, t)?;
        let t = log_one_minus_prob(&mut tape, l_fx)?;
        let t = mean(&mut tape, t)?;
        let fx = tape.affine(t, one_minus_a, T::zero())?;
        let t = log_one_minus_prob(&mut tape, l_fy)?;
        let t = mean(&mut tape, t)?;
        let fy = tape.affine(t, a, T::zero())?;
        let l_d = neg_sum(&mut tape, &[r, fx, fy])?;

        let t = log_prob(&mut tape, l_fx)?;
        let t = mean(&mut tape, t)?;
        let l_gx = tape.affine(t, -one_minus_a, T::zero())?;
        let t = log_prob(&mut tape, l_fy)?;
        let t = mean(&mut tape, t)?;
        let l_gy = tape.affine(t, -a, T::zero())?;

        let report = TripleGanSReport {
            l_d: item(&tape, l_d),
            l_gx: item(&tape, l_gx),
            l_gy: item(&tape, l_gy),
            rho_real: mean_prob(&tape, l_real),
            rho_fake_x: mean_prob(&tape, l_fx),
            rho_fake_y: mean_prob(&tape, l_fy),
        };
        ensure_finite(
            "triple_gan_s_losses",
            &[("L_d", report.l_d), ("L_gx", report.l_gx), ("L_gy", report.l_gy)],
        )?;
        match train {
            Some(Side::Discriminator) => {
                tape.backward(l_d)?;
                self.disc.accumulate_grads(&tape, &bd);
            }
            Some(Side::Generators) => {
                let total = tape.add(l_gx, l_gy)?;
                tape.backward(total)?;
                self.gen_x.accumulate_grads(&tape, &bgx);
                self.gen_y.accumulate_grads(&tape, &bgy);
            }
            None => {}
        }
        Ok(report)
    }

    pub fn losses(&mut self, batch: &Batch<T>) -> Result<TripleGanSReport> {
        self.run(batch, None)
    }

    fn zero_grad(&mut self) {
        for net in [&mut self.gen_x, &mut self.gen_y, &mut self.disc] {
            net.zero_grad();
        }
    }

    fn step_discriminator(&mut self) -> Result<()> {
        let mut group: Vec<_> = self.disc.params_mut().iter_mut().collect();
        self.opt_d.step(&mut group)
    }

    fn step_generators(&mut self) -> Result<()> {
        let (gx, gy) = (&mut self.gen_x, &mut self.gen_y);
        let mut group: Vec<_> = gx.params_mut().iter_mut().chain(gy.params_mut().iter_mut()).collect();
        self.opt_g.step(&mut group)
    }

    pub fn discriminator_step(&mut self, batch: &Batch<T>) -> Result<TripleGanSReport> {
        self.zero_grad();
        let r = self.run(batch, Some(Side::Discriminator))?;
        self.step_discriminator()?;
        Ok(r)
    }

    /// Same contract as the three-player step: both gradients at the
    /// pre-update parameters, then one update per side.
    pub fn train_step(&mut self, batch: &Batch<T>) -> Result<TripleGanSReport> {
        self.zero_grad();
        let r = self.run(batch, Some(Side::Discriminator))?;
        self.run(batch, Some(Side::Generators))?;
        ensure_finite_grads(
            "train_step",
            &[("gen_x", &self.gen_x), ("gen_y", &self.gen_y), ("disc", &self.disc)],
        )?;
        self.step_discriminator()?;
        self.step_generators()?;
        Ok(r)
    }

    /// Direct Monte-Carlo estimate of `V` from discriminator outputs.
    pub fn value_function_estimate(&self, batch: &Batch<T>) -> Result<f64> {
        let mut tape = Tape::new();
        let bgx = self.gen_x.bind(&mut tape, false);
        let bgy = self.gen_y.bind(&mut tape, false);
        let bd = self.disc.bind(&mut tape, false);
        let fakes = fake_pairs(&mut tape, (&self.gen_x, &bgx), (&self.gen_y, &bgy), batch)?;
        let real = real_pairs(&mut tape, batch)?;
        let l_real = self.disc.forward_logits(&mut tape, &bd, real)?;
        let l_fx = self.disc.forward_logits(&mut tape, &bd, fakes.x_fake)?;
        let l_fy = self.disc.forward_logits(&mut tape, &bd, fakes.y_fake)?;
        let m = batch.rows() as f64;
        let avg = |v: Var, f: &dyn Fn(T) -> f64| tape.value(v).iter().map(|&l| f(l)).sum::<f64>() / m;
        let real_term = avg(l_real, &|l| log_probs(l).0);
        let fx = avg(l_fx, &|l| log_probs(l).1);
        let fy = avg(l_fy, &|l| log_probs(l).1);
        Ok(real_term + (1.0 - self.alpha) * fx + self.alpha * fy)
    }

    pub fn checkpoint(&self) -> Result<Checkpoint> {
        let meta = serde_json::json!({
            "kind": "triple-gan-s",
            "alpha": self.alpha,
            "model": self.config,
        });
        Ok(Checkpoint::new(
            meta,
            vec![
                NetworkRecord::from_mlp("gen_x", &self.gen_x)?,
                NetworkRecord::from_mlp("gen_y", &self.gen_y)?,
                NetworkRecord::from_mlp("disc", &self.disc)?,
            ],
        ))
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let config: ModelConfig = serde_json::from_value(ckpt.meta["model"].clone())?;
        let alpha = ckpt.meta["alpha"]
            .as_f64()
            .ok_or_else(|| Error::Format("triple-gan-s checkpoint without alpha".into()))?;
        Self::from_networks(
            config,
            TripleGanSConfig::new(alpha)?,
            ckpt.network("gen_x")?.to_mlp()?,
            ckpt.network("gen_y")?.to_mlp()?,
            ckpt.network("disc")?.to_mlp()?,
        )
    }
}

#[derive(Clone, Copy)]
enum Side {
    Generators,
    Discriminator,
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::nn::HiddenActivation;
    use crate::trigan::batch::gaussian_noise;

    fn small_config() -> ModelConfig {
        ModelConfig {
            generator_hidden: vec![8],
            discriminator_hidden: vec![8],
            hidden_activation: HiddenActivation::Tanh,
            ..ModelConfig::default()
        }
    }

    fn random_batch(m: usize, seed: u64) -> Batch<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Batch::new(
            gaussian_noise(m, 1, &mut rng),
            gaussian_noise(m, 1, &mut rng),
            gaussian_noise(m, 1, &mut rng),
            gaussian_noise(m, 1, &mut rng),
            gaussian_noise(m, 2, &mut rng),
            gaussian_noise(m, 2, &mut rng),
        )
        .unwrap()
    }

    fn model(alpha: f64, seed: u64) -> TripleGanSModel<f64> {
        TripleGanSModel::new(small_config(), TripleGanSConfig::new(alpha).unwrap(), seed).unwrap()
    }

    #[test]
    fn alpha_must_be_inside_unit_interval() {
        for a in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(TripleGanSConfig::new(a).is_err());
        }
    }

    #[test]
    fn half_discriminator_closed_form() {
        let mut m = model(0.5, 1);
        let n = m.disc().params().len();
        for p in m.disc_mut().params_mut()[..n].iter_mut() {
            p.values_mut().iter_mut().for_each(|v| *v = 0.0);
        }
        let batch = random_batch(16, 0);
        let r = m.losses(&batch).unwrap();
        let ln2 = 2f64.ln();
        assert!((r.value() + 2.0 * ln2).abs() < 1e-12);
        assert!((r.l_gx - 0.5 * ln2).abs() < 1e-12);
        assert!((r.l_gy - 0.5 * ln2).abs() < 1e-12);
        assert!((m.value_function_estimate(&batch).unwrap() + 2.0 * ln2).abs() < 1e-12);
    }

    #[test]
    fn value_estimate_matches_loss() {
        let mut m = model(0.3, 2);
        let batch = random_batch(32, 4);
        let r = m.losses(&batch).unwrap();
        assert!((m.value_function_estimate(&batch).unwrap() - r.value()).abs() < 1e-12);
    }

    #[test]
    fn zero_learning_rate_and_determinism() {
        let mut m = model(0.5, 3);
        m.set_lr(0.0);
        let before = m.checkpoint().unwrap().to_json().unwrap();
        m.train_step(&random_batch(8, 1)).unwrap();
        assert_eq!(before, m.checkpoint().unwrap().to_json().unwrap());

        let run = || {
            let mut m = model(0.5, 3);
            for s in 0..4 {
                m.train_step(&random_batch(8, s)).unwrap();
            }
            m.checkpoint().unwrap().to_json().unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shares_generator_initialisation_with_delta_gan() {
        let t = model(0.5, 7);
        let d = crate::trigan::TriGanModel::<f64>::new(small_config(), 7).unwrap();
        assert_eq!(t.gen_x(), d.gen_x());
        assert_eq!(t.gen_y(), d.gen_y());
    }

    #[test]
    fn checkpoint_round_trip_keeps_alpha() {
        let m = model(0.25, 5);
        let back = TripleGanSModel::<f64>::from_checkpoint(&m.checkpoint().unwrap()).unwrap();
        assert_eq!(back.alpha(), 0.25);
        assert_eq!(back.disc(), m.disc());
    }
}
