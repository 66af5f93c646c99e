use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trigan_core::data::GaussianMixtureSpec;
use trigan_core::trigan::{Baseline, ModelConfig};
use trigan_core::{Error, Result};

/// Scalar type used for training and evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

/// Everything one run needs. Missing fields in a config file take the
/// defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub mixture: GaussianMixtureSpec,
    /// Use this CSV instead of sampling `mixture`.
    pub data_csv: Option<PathBuf>,
    pub samples_per_component: usize,
    pub paired_fraction: f64,
    pub model: ModelConfig,
    pub batch_size: usize,
    /// Discriminator updates per generator update.
    pub d_steps: usize,
    pub steps: u64,
    /// Write an evaluation JSON every this many steps; 0 disables.
    pub eval_every: u64,
    pub n_eval: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub baseline: Baseline,
    pub precision: Precision,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mixture: GaussianMixtureSpec::default(),
            data_csv: None,
            samples_per_component: 5000,
            paired_fraction: 1.0,
            model: ModelConfig::default(),
            batch_size: 128,
            d_steps: 1,
            steps: 20_000,
            eval_every: 5_000,
            n_eval: 20_000,
            seed: 0,
            out: PathBuf::from("runs/default"),
            baseline: Baseline::DeltaGan,
            precision: Precision::F64,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.paired_fraction) {
            return Err(Error::contract(
                "paired-fraction",
                format!("{} is outside [0, 1]", self.paired_fraction),
            ));
        }
        if self.samples_per_component == 0 {
            return Err(Error::contract("samples-per-component", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::contract("batch-size", "must be at least 1"));
        }
        if self.d_steps == 0 {
            return Err(Error::contract("d-steps", "must be at least 1"));
        }
        if self.n_eval == 0 {
            return Err(Error::contract("n-eval", "must be at least 1"));
        }
        if self.data_csv.is_none() {
            self.mixture.validate()?;
        }
        self.model.validate()?;
        if self.model.x_width != 1 || self.model.y_width != 1 {
            return Err(Error::contract("model", "the toy pipeline handles scalar x and y only"));
        }
        self.baseline.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    DeltaGan,
    TripleGanS,
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub baseline: Option<BaselineKind>,
    pub alpha: Option<f64>,
    pub paired_fraction: Option<f64>,
    pub steps: Option<u64>,
    pub n_eval: Option<usize>,
}

pub const DEFAULT_ALPHA: f64 = 0.5;

impl Overrides {
    /// Precedence: built-in defaults, then the config file, then flags.
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(f) = self.paired_fraction {
            cfg.paired_fraction = f;
        }
        if let Some(s) = self.steps {
            cfg.steps = s;
        }
        if let Some(n) = self.n_eval {
            cfg.n_eval = n;
        }
        let kind = self.baseline.unwrap_or(match cfg.baseline {
            Baseline::DeltaGan => BaselineKind::DeltaGan,
            Baseline::TripleGanS { .. } => BaselineKind::TripleGanS,
        });
        cfg.baseline = match kind {
            BaselineKind::DeltaGan => {
                if self.alpha.is_some() {
                    return Err(Error::contract("alpha", "only applies to --baseline triple-gan-s"));
                }
                Baseline::DeltaGan
            }
            BaselineKind::TripleGanS => {
                let current = match cfg.baseline {
                    Baseline::TripleGanS { alpha } => alpha,
                    Baseline::DeltaGan => DEFAULT_ALPHA,
                };
                Baseline::TripleGanS {
                    alpha: self.alpha.unwrap_or(current),
                }
            }
        };
        Ok(())
    }
}
