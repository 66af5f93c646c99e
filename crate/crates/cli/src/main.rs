use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trigan_cli::commands::CONFIG_FILE;
use trigan_cli::{BaselineKind, CliError, CliResult, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(
    name = "trigan",
    version,
    about = "Triangle GAN experiments on a 2D toy joint distribution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the mixture and write the dataset CSV.
    GenData(Common),
    /// Train a model on the run's dataset.
    Train(Common),
    /// Score a checkpoint and dump generated samples.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Defaults to `<out>/checkpoint.json`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Defaults to the config's data CSV, then `<out>/dataset.csv`.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    DeltaGan,
    TripleGanS,
}

#[derive(Args)]
struct Common {
    /// JSON config; flags below take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run every seed in `A..B` (inclusive) into `<out>/seed-<n>`.
    #[arg(long, value_parser = parse_seeds, conflicts_with = "seed")]
    seeds: Option<RangeInclusive<u64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    baseline: Option<BaselineArg>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    paired_fraction: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    n_eval: Option<usize>,
}

fn parse_seeds(s: &str) -> Result<RangeInclusive<u64>, String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a: u64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(a..=b)
}

impl Common {
    /// With `use_echo` and no `--config`, the config echo in `--out` is the
    /// base, so `eval` picks up the settings of the run it scores.
    fn resolve(&self, use_echo: bool) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let echo = self.out.as_deref().map(|o| o.join(CONFIG_FILE));
                match echo {
                    Some(p) if use_echo && p.exists() => ExperimentConfig::load(&p)?,
                    _ => ExperimentConfig::default(),
                }
            }
        };
        let overrides = Overrides {
            seed: self.seed,
            out: self.out.clone(),
            baseline: self.baseline.map(|b| match b {
                BaselineArg::DeltaGan => BaselineKind::DeltaGan,
                BaselineArg::TripleGanS => BaselineKind::TripleGanS,
            }),
            alpha: self.alpha,
            paired_fraction: self.paired_fraction,
            steps: self.steps,
            n_eval: self.n_eval,
        };
        overrides.apply(&mut cfg)?;
        Ok(cfg)
    }
}

fn run_each<R>(
    common: &Common,
    cfg: &ExperimentConfig,
    job: impl Fn(&ExperimentConfig) -> CliResult<R> + Sync,
    show: impl Fn(&ExperimentConfig, R),
) -> CliResult<()>
where
    R: Send,
{
    match &common.seeds {
        None => show(cfg, job(cfg)?),
        Some(seeds) => {
            let mut first_err = None;
            for (seed, result) in trigan_cli::sweep(cfg, seeds.clone(), &job) {
                let mut c = cfg.clone();
                c.seed = seed;
                c.out = cfg.out.join(format!("seed-{seed}"));
                match result {
                    Ok(r) => show(&c, r),
                    Err(e) => {
                        eprintln!("seed {seed}: {e}");
                        first_err.get_or_insert(e);
                    }
                }
            }
            if let Some(e) = first_err {
                return Err(e);
            }
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::GenData(common) => {
            let cfg = common.resolve(false)?;
            run_each(&common, &cfg, trigan_cli::gen_data, |_, path| {
                println!("wrote {}", path.display())
            })
        }
        Command::Train(common) => {
            let cfg = common.resolve(false)?;
            run_each(&common, &cfg, trigan_cli::train, |_, s| {
                println!(
                    "trained {} steps; metrics {}; checkpoint {}",
                    s.steps,
                    s.metrics.display(),
                    s.checkpoint.display()
                )
            })
        }
        Command::Eval {
            common,
            checkpoint,
            dataset,
        } => {
            let cfg = common.resolve(true)?;
            let job = |c: &ExperimentConfig| {
                let ckpt = checkpoint.as_deref().map(Path::to_path_buf);
                trigan_cli::eval(c, ckpt.as_deref(), dataset.as_deref())
            };
            run_each(&common, &cfg, job, |c, r| {
                println!(
                    "{}: grid-jsd px {:.4} py {:.4} mixture {:.4}; mmd2 px {:.5} py {:.5}; value {:.4}",
                    c.out.display(),
                    r.grid_jsd_px,
                    r.grid_jsd_py,
                    r.grid_jsd_mixture,
                    r.mmd2_px,
                    r.mmd2_py,
                    r.value_estimate
                )
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &CliError) -> u8 {
    e.exit_code() as u8
}
