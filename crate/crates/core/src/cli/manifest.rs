use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const MANIFEST_SCHEMA: &str = "fastgate.manifest/1";

/// Provenance record attached to every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub tool_version: String,
    pub command: String,
    /// Fully resolved configuration (search config, noise spec and grid, …).
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub threads: usize,
    /// Unix time at which the run started (s).
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
    /// SHA-256 of each input file, keyed by the path as given.
    pub input_hashes: BTreeMap<String, String>,
}

pub struct ManifestBuilder {
    command: String,
    started: Instant,
    started_unix: f64,
    inputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ManifestBuilder {
    pub fn start(command: &str) -> Self {
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0.0, |d| d.as_secs_f64());
        Self {
            command: command.to_string(),
            started: Instant::now(),
            started_unix,
            inputs: BTreeMap::new(),
        }
    }

    /// Read an input file, recording its hash.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path)?;
        self.inputs
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn finish(&self, config: serde_json::Value, seeds: Vec<u64>) -> RunManifest {
        RunManifest {
            schema: MANIFEST_SCHEMA.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command.clone(),
            config,
            seeds,
            threads: rayon::current_num_threads(),
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            input_hashes: self.inputs.clone(),
        }
    }
}
