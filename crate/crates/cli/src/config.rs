//! Optional TOML file supplying defaults for command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::failure::{CliResult, Failure};

/// Every key is optional; a flag given on the command line wins.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub jobs: Option<usize>,
    pub construction: Option<String>,
    pub kind: Option<String>,
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub lambda: Option<usize>,
    pub sizes: Option<Vec<usize>>,
    pub mechanism: Option<String>,
    pub measure: Option<String>,
    pub srs_mode: Option<String>,
    pub fallback: Option<String>,
    pub tolerance: Option<f64>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub allow_large: Option<bool>,
    pub symmetric: Option<bool>,
    pub emit_ordinal: Option<bool>,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        toml::from_str(&text).map_err(|e| Failure::param(format!("{}: {e}", path.display())))
    }
}

/// The flag if given, else the configured value.
pub fn pick<T: Clone>(flag: Option<T>, configured: &Option<T>) -> Option<T> {
    flag.or_else(|| configured.clone())
}

pub fn require<T>(value: Option<T>, name: &str) -> CliResult<T> {
    value.ok_or_else(|| Failure::param(format!("--{name} is required (flag or config key)")))
}
