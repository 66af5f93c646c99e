use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::nn::{Checkpoint, Mlp};
use crate::scalar::Scalar;

use super::batch::{gaussian_noise, Batch};
use super::common::{generate, ModelConfig};
use super::delta::{LossReport, TriGanModel};
use super::triple::{TripleGanSConfig, TripleGanSModel, TripleGanSReport};

/// Which game to play.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Baseline {
    DeltaGan,
    TripleGanS { alpha: f64 },
}

impl Baseline {
    pub fn validate(&self) -> Result<()> {
        if let Baseline::TripleGanS { alpha } = self {
            TripleGanSConfig::new(*alpha)?;
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Baseline::DeltaGan => "delta-gan",
            Baseline::TripleGanS { .. } => "triple-gan-s",
        }
    }
}

/// Per-step losses of either game.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepReport {
    Delta(LossReport),
    TripleS(TripleGanSReport),
}

impl StepReport {
    /// Metrics CSV columns after `step`.
    pub fn columns(baseline: &Baseline) -> &'static [&'static str] {
        match baseline {
            Baseline::DeltaGan => &["L_d1", "L_d2", "L_g1", "L_g2", "V"],
            Baseline::TripleGanS { .. } => &["L_d", "L_gx", "L_gy", "V"],
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            StepReport::Delta(r) => vec![r.l_d1, r.l_d2, r.l_g1, r.l_g2, r.value()],
            StepReport::TripleS(r) => vec![r.l_d, r.l_gx, r.l_gy, r.value()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Either trained model behind one interface.
pub enum GameModel<T> {
    Delta(TriGanModel<T>),
    TripleS(TripleGanSModel<T>),
}

impl<T: Scalar> GameModel<T> {
    pub fn new(baseline: Baseline, config: ModelConfig, seed: u64) -> Result<Self> {
        Ok(match baseline {
            Baseline::DeltaGan => GameModel::Delta(TriGanModel::new(config, seed)?),
            Baseline::TripleGanS { alpha } => {
                GameModel::TripleS(TripleGanSModel::new(config, TripleGanSConfig::new(alpha)?, seed)?)
            }
        })
    }

    pub fn baseline(&self) -> Baseline {
        match self {
            GameModel::Delta(_) => Baseline::DeltaGan,
            GameModel::TripleS(m) => Baseline::TripleGanS { alpha: m.alpha() },
        }
    }

    pub fn config(&self) -> &ModelConfig {
        match self {
            GameModel::Delta(m) => m.config(),
            GameModel::TripleS(m) => m.config(),
        }
    }

    pub fn generators(&self) -> (&Mlp<T>, &Mlp<T>) {
        match self {
            GameModel::Delta(m) => (m.gen_x(), m.gen_y()),
            GameModel::TripleS(m) => (m.gen_x(), m.gen_y()),
        }
    }

    pub fn set_lr(&mut self, lr: f64) {
        match self {
            GameModel::Delta(m) => m.set_lr(lr),
            GameModel::TripleS(m) => m.set_lr(lr),
        }
    }

    pub fn train_step(&mut self, batch: &Batch<T>) -> Result<StepReport> {
        Ok(match self {
            GameModel::Delta(m) => StepReport::Delta(m.train_step(batch)?),
            GameModel::TripleS(m) => StepReport::TripleS(m.train_step(batch)?),
        })
    }

    pub fn discriminator_step(&mut self, batch: &Batch<T>) -> Result<()> {
        match self {
            GameModel::Delta(m) => m.discriminator_step(batch).map(|_| ()),
            GameModel::TripleS(m) => m.discriminator_step(batch).map(|_| ()),
        }
    }

    pub fn value_function_estimate(&self, batch: &Batch<T>) -> Result<f64> {
        match self {
            GameModel::Delta(m) => m.value_function_estimate(batch),
            GameModel::TripleS(m) => m.value_function_estimate(batch),
        }
    }

    pub fn checkpoint(&self) -> Result<Checkpoint> {
        match self {
            GameModel::Delta(m) => m.checkpoint(),
            GameModel::TripleS(m) => m.checkpoint(),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        match ckpt.meta["kind"].as_str() {
            Some("delta-gan") => Ok(GameModel::Delta(TriGanModel::from_checkpoint(ckpt)?)),
            Some("triple-gan-s") => Ok(GameModel::TripleS(TripleGanSModel::from_checkpoint(ckpt)?)),
            other => Err(Error::Format(format!("unknown model kind {other:?}"))),
        }
    }

    /// Fake pairs `(x~, y)` and `(x, y~)` for the given conditioning rows,
    /// with fresh independent noise per row and direction.
    pub fn sample_fake_pairs<R: Rng + ?Sized>(
        &self,
        unpaired_x: &Tensor<T>,
        unpaired_y: &Tensor<T>,
        rng: &mut R,
    ) -> Result<(Tensor<T>, Tensor<T>)> {
        let (gx, gy) = self.generators();
        sample_fake_pairs(gx, gy, unpaired_x, unpaired_y, rng)
    }
}

/// Row-wise concatenation of two matrices with equal row counts.
fn hstack<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    if a.rows() != b.rows() {
        return Err(Error::Shape {
            op: "concat",
            left: a.shape().to_vec(),
            right: b.shape().to_vec(),
        });
    }
    let mut v = Vec::with_capacity(a.numel() + b.numel());
    for r in 0..a.rows() {
        v.extend_from_slice(a.row(r));
        v.extend_from_slice(b.row(r));
    }
    Tensor::matrix(a.rows(), a.cols() + b.cols(), v)
}

/// `x~ = G_x(y ++ z)` and `y~ = G_y(x ++ z')` with independent noise for
/// every row; returns `(x~ ++ y, x ++ y~)`.
pub fn sample_fake_pairs<T: Scalar, R: Rng + ?Sized>(
    gen_x: &Mlp<T>,
    gen_y: &Mlp<T>,
    unpaired_x: &Tensor<T>,
    unpaired_y: &Tensor<T>,
    rng: &mut R,
) -> Result<(Tensor<T>, Tensor<T>)> {
    if unpaired_x.rows() != unpaired_y.rows() {
        return Err(Error::Shape {
            op: "sample_fake_pairs",
            left: unpaired_x.shape().to_vec(),
            right: unpaired_y.shape().to_vec(),
        });
    }
    let nz_x = gen_x.spec().input_width - unpaired_y.cols();
    let nz_y = gen_y.spec().input_width - unpaired_x.cols();
    let zx: Tensor<T> = gaussian_noise(unpaired_y.rows(), nz_x, rng);
    let zy: Tensor<T> = gaussian_noise(unpaired_x.rows(), nz_y, rng);
    let x_tilde = generate(gen_x, unpaired_y, &zx)?;
    let y_tilde = generate(gen_y, unpaired_x, &zy)?;
    Ok((hstack(&x_tilde, unpaired_y)?, hstack(unpaired_x, &y_tilde)?))
}
