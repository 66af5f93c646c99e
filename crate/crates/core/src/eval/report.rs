use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Distribution-matching summary for one trained model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvalReport {
    pub grid_jsd_px: f64,
    pub grid_jsd_py: f64,
    pub mmd2_px: f64,
    pub mmd2_py: f64,
    pub value_estimate: f64,
    /// Grid JSD of `(p_x + p_y) / 2` against the truth.
    pub grid_jsd_mixture: f64,
    pub n_eval: usize,
    pub step: u64,
    #[serde(default)]
    pub config: serde_json::Value,
}

impl EvalReport {
    pub fn worst_grid_jsd(&self) -> f64 {
        self.grid_jsd_px.max(self.grid_jsd_py)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
