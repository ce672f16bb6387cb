//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::model::{FlowParams, InitialCurveSpec, StopThresholds};

fn default_stride() -> usize {
    1
}

fn default_svg() -> bool {
    true
}

/// Everything needed to reproduce one run of the scheme. Unknown fields are
/// rejected so that typos fail loudly instead of silently using defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub curve: InitialCurveSpec,
    #[serde(rename = "V0")]
    pub v0: f64,
    pub beta: f64,
    #[serde(rename = "J")]
    pub j: usize,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Write a snapshot every this many steps.
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub stop: StopThresholds,
    /// Emit `curves.svg` next to the snapshots.
    #[serde(default = "default_svg")]
    pub svg: bool,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad config: {e}")))?;
        cfg.params()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validated solver parameters (with `dt` snapped to `T / M`).
    pub fn params(&self) -> Result<FlowParams, CliError> {
        self.curve.validate().map_err(CliError::from_invalid)?;
        let mut p = FlowParams::new(self.beta, self.v0, self.j, self.dt, self.t_final)
            .map_err(CliError::from_invalid)?;
        p.snapshot_stride = self.snapshot_stride;
        p.stop = self.stop;
        p.validate().map_err(CliError::from_invalid)?;
        Ok(p)
    }

    /// The dumbbell parameterization is our own, so such runs only reproduce
    /// the reference behaviour qualitatively.
    pub fn is_qualitative(&self) -> bool {
        matches!(self.curve, InitialCurveSpec::Dumbbell { .. })
    }
}
