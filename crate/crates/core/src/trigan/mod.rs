//! Triangle GAN and the Triple GAN-s baseline.

mod batch;
mod common;
mod delta;
mod evaluate;
mod game;
mod train;
mod triple;

pub use batch::{gaussian_noise, Batch, BatchSampler};
pub use common::{generate, ModelConfig, PROB_EPS};
pub use delta::{DeltaBindings, DiscriminatorGraph, GeneratorGraph, LossReport, TriGanModel};
pub use evaluate::{evaluate, EvalSettings, Evaluation};
pub use game::{sample_fake_pairs, Baseline, GameModel, StepReport};
pub use train::{MetricsWriter, Trainer};
pub use triple::{TripleGanSConfig, TripleGanSModel, TripleGanSReport};
