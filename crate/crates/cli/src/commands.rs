use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use trigan_core::data::PairDataset;
use trigan_core::eval::{histogram2d, EvalReport, Grid, GridDensity};
use trigan_core::nn::Checkpoint;
use trigan_core::trigan::{evaluate, EvalSettings, GameModel, MetricsWriter, Trainer};
use trigan_core::{Error, Scalar};

use crate::config::{ExperimentConfig, Precision};

pub const CONFIG_FILE: &str = "config.json";
pub const DATASET_FILE: &str = "dataset.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const LAST_GOOD_FILE: &str = "checkpoint-last-good.json";
pub const EVAL_FILE: &str = "eval.json";
pub const SAMPLES_PX_FILE: &str = "samples_px.csv";
pub const SAMPLES_PY_FILE: &str = "samples_py.csv";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("training diverged at step {step}: {source}\nlast good checkpoint: {}", checkpoint.display())]
    Diverged {
        step: u64,
        checkpoint: PathBuf,
        source: Error,
    },
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    /// 2 for bad input, 3 for numeric failure, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Diverged { .. } => 3,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(Error::Io(_)) => 1,
            CliError::Core(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn prepare_out(cfg: &ExperimentConfig) -> CliResult<()> {
    fs::create_dir_all(&cfg.out)?;
    cfg.save(&cfg.out.join(CONFIG_FILE))?;
    Ok(())
}

/// Samples the mixture, marks the paired subset and writes `dataset.csv`.
pub fn gen_data(cfg: &ExperimentConfig) -> CliResult<PathBuf> {
    cfg.validate()?;
    let dataset = match &cfg.data_csv {
        Some(path) => PairDataset::load(path)?,
        None => cfg.mixture.sample(cfg.samples_per_component, cfg.seed)?,
    };
    let dataset = dataset.split_semi_supervised(cfg.paired_fraction, cfg.seed)?;
    prepare_out(cfg)?;
    let path = cfg.out.join(DATASET_FILE);
    dataset.save(&path)?;
    Ok(path)
}

fn dataset_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.data_csv.clone().unwrap_or_else(|| cfg.out.join(DATASET_FILE))
}

/// Loads the run's dataset and re-derives the paired subset from the
/// config, so `--paired-fraction` applies at training time too.
pub fn load_dataset(cfg: &ExperimentConfig, path: Option<&Path>) -> CliResult<PairDataset> {
    let path = path.map(Path::to_path_buf).unwrap_or_else(|| dataset_path(cfg));
    if !path.exists() {
        return Err(Error::contract("dataset", format!("{} not found; run gen-data first", path.display())).into());
    }
    Ok(PairDataset::load(&path)?.split_semi_supervised(cfg.paired_fraction, cfg.seed)?)
}

/// Reference density for scoring: the mixture itself, or a histogram of
/// the data when it came from a file.
pub fn truth(cfg: &ExperimentConfig, dataset: &PairDataset) -> CliResult<GridDensity> {
    let grid = Grid::toy();
    Ok(match cfg.data_csv {
        None => GridDensity::from_density(grid, 8, |p| cfg.mixture.pdf(p))?,
        Some(_) => histogram2d(&dataset.points(), grid)?,
    })
}

fn eval_settings(cfg: &ExperimentConfig) -> EvalSettings {
    EvalSettings {
        n_eval: cfg.n_eval,
        seed: cfg.seed,
        ..EvalSettings::default()
    }
}

pub struct TrainSummary {
    pub steps: u64,
    pub checkpoint: PathBuf,
    pub metrics: PathBuf,
}

pub fn train(cfg: &ExperimentConfig) -> CliResult<TrainSummary> {
    cfg.validate()?;
    let dataset = load_dataset(cfg, None)?;
    prepare_out(cfg)?;
    match cfg.precision {
        Precision::F32 => train_typed::<f32>(cfg, &dataset),
        Precision::F64 => train_typed::<f64>(cfg, &dataset),
    }
}

fn save_checkpoint<T: Scalar>(model: &GameModel<T>, step: u64, path: &Path) -> CliResult<()> {
    let mut ckpt = model.checkpoint()?;
    ckpt.meta["step"] = step.into();
    ckpt.save(path)?;
    Ok(())
}

fn train_typed<T: Scalar>(cfg: &ExperimentConfig, dataset: &PairDataset) -> CliResult<TrainSummary> {
    let model = GameModel::<T>::new(cfg.baseline, cfg.model.clone(), cfg.seed)?;
    let mut trainer = Trainer::new(model, dataset, cfg.batch_size, cfg.d_steps, cfg.seed)?;
    let metrics_path = cfg.out.join(METRICS_FILE);
    let mut metrics = MetricsWriter::new(BufWriter::new(File::create(&metrics_path)?), &cfg.baseline)?;
    let truth = if cfg.eval_every > 0 {
        Some(truth(cfg, dataset)?)
    } else {
        None
    };

    for step in 1..=cfg.steps {
        let report = match trainer.step() {
            Ok(r) => r,
            Err(e) if e.is_numeric() => {
                metrics.flush()?;
                // A failed step leaves every parameter where it was.
                let path = cfg.out.join(LAST_GOOD_FILE);
                save_checkpoint(trainer.model(), step - 1, &path)?;
                return Err(CliError::Diverged {
                    step,
                    checkpoint: path,
                    source: e,
                });
            }
            Err(e) => return Err(e.into()),
        };
        metrics.write(step, &report)?;
        if let Some(truth) = &truth {
            if step % cfg.eval_every == 0 {
                let mut ev = evaluate(trainer.model(), dataset, truth, &eval_settings(cfg))?.report;
                ev.step = step;
                ev.config = serde_json::to_value(cfg).map_err(Error::from)?;
                ev.save(&cfg.out.join(format!("eval-step-{step}.json")))?;
            }
        }
    }
    metrics.flush()?;
    let checkpoint = cfg.out.join(CHECKPOINT_FILE);
    save_checkpoint(trainer.model(), trainer.steps_done(), &checkpoint)?;
    Ok(TrainSummary {
        steps: trainer.steps_done(),
        checkpoint,
        metrics: metrics_path,
    })
}

fn write_samples(path: &Path, samples: &[[f64; 2]]) -> CliResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "x,y")?;
    for p in samples {
        writeln!(out, "{:.10e},{:.10e}", p[0], p[1])?;
    }
    out.flush()?;
    Ok(())
}

/// Scores a checkpoint against the run's reference density and dumps the
/// generated joint samples.
pub fn eval(cfg: &ExperimentConfig, checkpoint: Option<&Path>, dataset: Option<&Path>) -> CliResult<EvalReport> {
    cfg.validate()?;
    let ckpt_path = checkpoint
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.out.join(CHECKPOINT_FILE));
    let ckpt = Checkpoint::load(&ckpt_path)?;
    let data = load_dataset(cfg, dataset)?;
    fs::create_dir_all(&cfg.out)?;
    let evaluation = match cfg.precision {
        Precision::F32 => eval_typed::<f32>(cfg, &ckpt, &data)?,
        Precision::F64 => eval_typed::<f64>(cfg, &ckpt, &data)?,
    };
    write_samples(&cfg.out.join(SAMPLES_PX_FILE), &evaluation.samples_px)?;
    write_samples(&cfg.out.join(SAMPLES_PY_FILE), &evaluation.samples_py)?;
    let mut report = evaluation.report;
    report.step = ckpt.meta["step"].as_u64().unwrap_or(0);
    report.config = serde_json::to_value(cfg).map_err(Error::from)?;
    report.save(&cfg.out.join(EVAL_FILE))?;
    Ok(report)
}

fn eval_typed<T: Scalar>(
    cfg: &ExperimentConfig,
    ckpt: &Checkpoint,
    data: &PairDataset,
) -> CliResult<trigan_core::trigan::Evaluation> {
    let model = GameModel::<T>::from_checkpoint(ckpt)?;
    if model.config().x_width != cfg.model.x_width
        || model.config().y_width != cfg.model.y_width
        || model.config().noise_width != cfg.model.noise_width
    {
        return Err(Error::contract(
            "checkpoint",
            format!(
                "widths (x {}, y {}, noise {}) do not match the config",
                model.config().x_width,
                model.config().y_width,
                model.config().noise_width
            ),
        )
        .into());
    }
    Ok(evaluate(&model, data, &truth(cfg, data)?, &eval_settings(cfg))?)
}

/// Runs `job` once per seed on its own thread, each in `out/seed-<n>`.
pub fn sweep<F, R>(cfg: &ExperimentConfig, seeds: std::ops::RangeInclusive<u64>, job: F) -> Vec<(u64, CliResult<R>)>
where
    F: Fn(&ExperimentConfig) -> CliResult<R> + Sync,
    R: Send,
{
    std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .map(|seed| {
                let mut c = cfg.clone();
                c.seed = seed;
                c.out = cfg.out.join(format!("seed-{seed}"));
                let job = &job;
                (seed, scope.spawn(move || job(&c)))
            })
            .collect();
        handles
            .into_iter()
            .map(|(seed, h)| (seed, h.join().expect("worker panicked")))
            .collect()
    })
}
