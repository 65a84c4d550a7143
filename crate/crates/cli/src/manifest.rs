//! Provenance record written next to every command's outputs.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

pub fn unix_seconds() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub inputs: Vec<InputFile>,
    /// File names relative to the output directory, sorted.
    pub outputs: Vec<String>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, config: &[u8], seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            config_sha256: sha256_hex(config),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started_unix: unix_seconds(),
            finished_unix: 0,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), CliError> {
        let sha256 = file_digest(path)?;
        self.inputs.push(InputFile { path: path.to_path_buf(), sha256 });
        Ok(())
    }

    /// Writes the manifest into `dir`, replacing any earlier one.
    pub fn finish(mut self, dir: &Path) -> Result<(), CliError> {
        self.outputs.sort();
        self.outputs.dedup();
        self.finished_unix = unix_seconds();
        let text = serde_json::to_string_pretty(&self).map_err(|e| CliError::Data(e.to_string()))?;
        std::fs::write(dir.join(MANIFEST_NAME), text + "\n")?;
        Ok(())
    }
}

/// Writes files into one output directory and records their names.
pub struct OutputDir {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

impl OutputDir {
    pub fn create(dir: PathBuf, manifest: RunManifest) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir, manifest })
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), contents)?;
        self.record(name);
        Ok(())
    }

    pub fn record(&mut self, name: &str) {
        self.manifest.outputs.push(name.to_string());
    }

    pub fn finish(self) -> Result<(), CliError> {
        self.manifest.finish(&self.dir)
    }
}
