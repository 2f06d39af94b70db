use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

use mcqlint::detectors::DetectorConfig;
use mcqlint::lingmetrics::MetricsConfig;
use mcqlint::llmgate::{GateSettings, HttpSettings};

/// Contents of a `--config` TOML file. Every section is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub detectors: DetectorConfig,
    pub metrics: MetricsConfig,
    pub llm: GateSettings,
    pub http: HttpSettings,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: FileConfig = toml::from_str(&text).with_context(|| format!("{}: invalid config", path.display()))?;
        cfg.detectors
            .validate()
            .with_context(|| format!("{}: invalid detector thresholds", path.display()))?;
        Ok(cfg)
    }
}
