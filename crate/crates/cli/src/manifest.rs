use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use euler_semiflow::io::write_atomic;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SEED_VAR: &str = "EULER_SEMIFLOW_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the raw config bytes, hex encoded.
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub started: u64,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

pub fn hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// The config seed unless overridden by `EULER_SEMIFLOW_SEED`.
pub fn seed(config_seed: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Parse(format!("{SEED_VAR}={v} is not an unsigned integer"))),
        Err(_) => Ok(config_seed),
    }
}

impl RunManifest {
    pub fn new(command: &str, config: &[u8], seed: u64, inputs: Vec<String>, outputs: Vec<String>) -> Self {
        let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self {
            command: command.into(),
            config_hash: hash(config),
            code_version: env!("CARGO_PKG_VERSION").into(),
            seed,
            started,
            inputs,
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_atomic(&dir.join("manifest.json"), text.as_bytes()).map_err(CliError::from)
    }
}
