// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use serde::Deserialize;

use rtlcast::features::Effort;
use rtlcast::llm::BackendConfig;

/// Looked up in the working directory when `--config` is not given.
pub const DEFAULT_CONFIG_FILE: &str = "rtlcast.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSection {
    pub endpoint_url: Option<String>,
    pub model_id: Option<String>,
    pub timeout_s: Option<u64>,
    pub max_attempts: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdaSection {
    pub clock_period_ns: Option<f64>,
    pub target_utilization: Option<f64>,
    pub effort_level: Option<Effort>,
}

/// Contents of the config file; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    #[serde(default)]
    pub backend: BackendSection,
    pub max_iterations: Option<u32>,
    #[serde(default)]
    pub eda: EdaSection,
    pub model_path: Option<PathBuf>,
    pub template_dir: Option<PathBuf>,
    pub session_dir: Option<PathBuf>,
    pub output_format: Option<OutputFormat>,
}

impl CliConfig {
    pub fn load(explicit: Option<&Path>) -> anyhow::Result<Self> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => {
                let p = PathBuf::from(DEFAULT_CONFIG_FILE);
                if !p.exists() {
                    return Ok(CliConfig::default());
                }
                p
            }
        };
        let text = std::fs::read_to_string(&path).map_err(|e| anyhow::anyhow!("config {}: {}", path.display(), e))?;
        let cfg: CliConfig = toml::from_str(&text).map_err(|e| anyhow::anyhow!("config {}: {}", path.display(), e))?;
        if cfg.max_iterations == Some(0) {
            anyhow::bail!("config {}: max_iterations must be at least 1", path.display());
        }
        Ok(cfg)
    }

    /// Backend settings with flag/env overrides already folded into `flags`.
    pub fn backend(&self, flags: &BackendSection) -> BackendConfig {
        let d = BackendConfig::default();
        BackendConfig {
            endpoint_url: pick(flags.endpoint_url.clone(), self.backend.endpoint_url.clone(), d.endpoint_url),
            model_id: pick(flags.model_id.clone(), self.backend.model_id.clone(), d.model_id),
            timeout_s: pick(flags.timeout_s, self.backend.timeout_s, d.timeout_s),
            max_attempts: pick(flags.max_attempts, self.backend.max_attempts, d.max_attempts),
        }
    }
}

/// First of: flag or env (clap merges these), config file, default.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}
