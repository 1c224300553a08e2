//! Optional TOML run configuration for the map and sweep pipelines.
//! Command-line flags win over config values on conflict.

use std::path::PathBuf;

use serde::Deserialize;

use crate::util::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub axes: Option<Vec<String>>,
    pub meta: Option<Vec<String>>,
    pub epsilon: Option<f64>,
    pub epsilons: Option<Vec<f64>>,
    pub metric: Option<String>,
    pub pick_order: Option<String>,
    pub net_seed: Option<u64>,
    pub normalize: Option<bool>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub dot: Option<PathBuf>,
    pub color_by: Option<String>,
    pub reference: Option<String>,
    pub layout_seed: Option<u64>,
    pub iterations: Option<usize>,
    pub legend: Option<bool>,
    pub group_by: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&PathBuf>) -> CliResult<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}
