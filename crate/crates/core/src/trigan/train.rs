use std::io::Write;

use rand_chacha::ChaCha8Rng;

use crate::data::PairDataset;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::scalar::Scalar;

use super::batch::BatchSampler;
use super::game::{Baseline, GameModel, StepReport};

/// Drives one model over a dataset with a private RNG stream.
pub struct Trainer<T> {
    model: GameModel<T>,
    sampler: BatchSampler,
    rng: ChaCha8Rng,
    d_steps: usize,
    step: u64,
}

impl<T: Scalar> Trainer<T> {
    /// `d_steps` discriminator updates per generator update; the extra ones
    /// use fresh batches and precede the joint step.
    pub fn new(
        model: GameModel<T>,
        dataset: &PairDataset,
        batch_size: usize,
        d_steps: usize,
        seed: u64,
    ) -> Result<Self> {
        if d_steps == 0 {
            return Err(Error::contract("d-steps", "must be at least 1"));
        }
        let sampler = BatchSampler::new(dataset, batch_size, model.config().noise_width)?;
        Ok(Trainer {
            model,
            sampler,
            rng: stream_rng(seed, Stream::Batches),
            d_steps,
            step: 0,
        })
    }

    pub fn model(&self) -> &GameModel<T> {
        &self.model
    }

    pub fn into_model(self) -> GameModel<T> {
        self.model
    }

    pub fn steps_done(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self) -> Result<StepReport> {
        for _ in 1..self.d_steps {
            let batch = self.sampler.sample(&mut self.rng);
            self.model.discriminator_step(&batch)?;
        }
        let batch = self.sampler.sample(&mut self.rng);
        let report = self.model.train_step(&batch)?;
        self.step += 1;
        Ok(report)
    }
}

/// Writes `step,<loss columns>` rows.
pub struct MetricsWriter<W: Write> {
    out: W,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(mut out: W, baseline: &Baseline) -> Result<Self> {
        let mut header = vec!["step"];
        header.extend_from_slice(StepReport::columns(baseline));
        writeln!(out, "{}", header.join(","))?;
        Ok(MetricsWriter { out })
    }

    pub fn write(&mut self, step: u64, report: &StepReport) -> Result<()> {
        let cells: Vec<String> = report.values().iter().map(|v| format!("{v:.10e}")).collect();
        writeln!(self.out, "{step},{}", cells.join(","))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}
