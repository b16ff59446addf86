//! Run manifest persisted alongside every sample file, so any published
//! number can be re-derived from the recorded configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use egcount::graph::CANONICAL_KEY_FORMAT;
use egcount::mcmc::{derive_chain_seed, ChainConfig};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub software_version: String,
    pub command_line: Vec<String>,
    pub config: ChainConfig,
    pub master_seed: u64,
    pub canonical_key_format: String,
    pub started_at: String,
    pub finished_at: Option<String>,
    pub chain_seeds: Vec<u64>,
}

impl RunManifest {
    pub fn new(config: &ChainConfig) -> Self {
        RunManifest {
            schema_version: egcount::SCHEMA_VERSION,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            command_line: std::env::args().collect(),
            config: config.clone(),
            master_seed: config.seed,
            canonical_key_format: CANONICAL_KEY_FORMAT.to_string(),
            started_at: now(),
            finished_at: None,
            chain_seeds: (0..config.chains)
                .map(|i| derive_chain_seed(config.seed, i))
                .collect(),
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).unwrap())
    }

    pub fn read(path: &Path) -> Option<RunManifest> {
        let text = std::fs::read_to_string(path).ok()?;
        serde_json::from_str(&text).ok()
    }
}

/// Sample files reference their manifest by adjacency: `<file>.manifest.json`.
pub fn sidecar_path(sample_path: &Path) -> PathBuf {
    let mut name = sample_path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    sample_path.with_file_name(name)
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}
