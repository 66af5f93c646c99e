use rand::seq::index::sample;
use rand::Rng;

use crate::autodiff::Tensor;
use crate::data::PairDataset;
use crate::error::{Error, Result};
use crate::eval::{histogram2d, jsd, mmd2, Bandwidth, EvalReport, Grid, GridDensity};
use crate::rng::{stream_rng, Stream};
use crate::scalar::Scalar;

use super::batch::BatchSampler;
use super::game::GameModel;

#[derive(Clone, Debug)]
pub struct EvalSettings {
    pub n_eval: usize,
    pub grid: Grid,
    pub mmd_samples: usize,
    pub value_batch: usize,
    pub seed: u64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            n_eval: 20_000,
            grid: Grid::toy(),
            mmd_samples: 5_000,
            value_batch: 2_048,
            seed: 0,
        }
    }
}

/// Report plus the joint samples it was computed from.
pub struct Evaluation {
    pub report: EvalReport,
    pub samples_px: Vec<[f64; 2]>,
    pub samples_py: Vec<[f64; 2]>,
}

fn column<T: Scalar>(values: &[f64]) -> Result<Tensor<T>> {
    Tensor::matrix(values.len(), 1, values.iter().map(|&v| T::lit(v)).collect())
}

fn pick<R: Rng>(pool: &[f64], n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| pool[rng.random_range(0..pool.len())]).collect()
}

fn pairs<T: Scalar>(t: &Tensor<T>) -> Vec<[f64; 2]> {
    (0..t.rows())
        .map(|r| {
            let row = t.row(r);
            [row[0].to_f64().unwrap_or(f64::NAN), row[1].to_f64().unwrap_or(f64::NAN)]
        })
        .collect()
}

/// Draws `n_eval` samples from each generator's joint, conditioning on values
/// resampled from the data marginals, and scores them against `truth`.
pub fn evaluate<T: Scalar>(
    model: &GameModel<T>,
    dataset: &PairDataset,
    truth: &GridDensity,
    settings: &EvalSettings,
) -> Result<Evaluation> {
    if settings.n_eval == 0 {
        return Err(Error::contract("n-eval", "must be positive"));
    }
    if model.config().x_width != 1 || model.config().y_width != 1 {
        return Err(Error::contract("model", "joint evaluation needs scalar x and y"));
    }
    let mut rng = stream_rng(settings.seed, Stream::Eval);
    let ys = pick(&dataset.ys(), settings.n_eval, &mut rng);
    let xs = pick(&dataset.xs(), settings.n_eval, &mut rng);
    let (fake_x, fake_y) = model.sample_fake_pairs(&column::<T>(&xs)?, &column::<T>(&ys)?, &mut rng)?;
    let samples_px = pairs(&fake_x);
    let samples_py = pairs(&fake_y);
    if samples_px
        .iter()
        .chain(&samples_py)
        .any(|p| !p[0].is_finite() || !p[1].is_finite())
    {
        return Err(Error::numeric("evaluate", "generator produced non-finite samples"));
    }

    let hist_px = histogram2d(&samples_px, settings.grid)?;
    let hist_py = histogram2d(&samples_py, settings.grid)?;
    let hist_mix = GridDensity::mixture(&[&hist_px, &hist_py], &[0.5, 0.5])?;

    let points = dataset.points();
    let m = settings.mmd_samples.min(points.len()).min(settings.n_eval).max(1);
    let reference: Vec<[f64; 2]> = sample(&mut rng, points.len(), m).iter().map(|i| points[i]).collect();
    let mmd = |s: &[[f64; 2]]| mmd2(&s[..m], &reference, Bandwidth::MedianHeuristic);

    let vb = settings.value_batch.clamp(1, settings.n_eval);
    let sampler = BatchSampler::new(dataset, vb, model.config().noise_width)?;
    let batch = sampler.sample::<T, _>(&mut rng);
    let value_estimate = model.value_function_estimate(&batch)?;

    let report = EvalReport {
        grid_jsd_px: jsd(&hist_px, truth)?,
        grid_jsd_py: jsd(&hist_py, truth)?,
        mmd2_px: mmd(&samples_px)?,
        mmd2_py: mmd(&samples_py)?,
        value_estimate,
        grid_jsd_mixture: jsd(&hist_mix, truth)?,
        n_eval: settings.n_eval,
        step: 0,
        config: serde_json::Value::Null,
    };
    Ok(Evaluation {
        report,
        samples_px,
        samples_py,
    })
}
