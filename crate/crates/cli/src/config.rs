//! Global settings and the run record embedded in every output.
//!
//! Precedence: command-line flags, then the `--config` file, then defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use readk_core::harness::Caps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    #[default]
    Structured,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Structured => "json",
        }
    }
}

/// Optional file with defaults for the global flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsFile {
    pub format: Option<Format>,
    pub rng_seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub input_cap: Option<usize>,
    pub seed_cap: Option<usize>,
    pub samples: Option<u64>,
}

impl SettingsFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).map_err(|e| {
            let loc = e
                .span()
                .map(|s| {
                    let before = &text[..s.start.min(text.len())];
                    format!(" at line {}", before.matches('\n').count() + 1)
                })
                .unwrap_or_default();
            anyhow::anyhow!("config {}{loc}: {}", path.display(), e.message())
        })
    }
}

/// Resolved global settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub format: Format,
    pub rng_seed: u64,
    /// Not part of the run record: results never depend on it.
    #[serde(skip)]
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub caps: Caps,
    pub samples: Option<u64>,
}

/// Everything needed to reproduce an output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub version: &'static str,
    pub command: String,
    pub params: serde_json::Value,
    #[serde(flatten)]
    pub settings: Settings,
}
