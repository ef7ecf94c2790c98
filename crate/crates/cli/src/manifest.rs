use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use xnls_core::io::write_atomic;

use crate::config::sha256_hex;
use crate::CliError;

pub const CONFIG_ECHO: &str = "config.echo";
pub const MANIFEST: &str = "manifest.json";

/// Run metadata. `config_hash` is the SHA-256 of the `config.echo` bytes; the run id is
/// its first 16 hex digits, so identical configs share an id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    pub config_hash: String,
    pub artifact_version: String,
    /// Unix seconds.
    pub started_at: u64,
    pub finished_at: u64,
    pub suites: BTreeMap<String, bool>,
}

pub fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl RunManifest {
    pub fn new(command: &str, echo: &str, started_at: u64) -> Self {
        let config_hash = sha256_hex(echo.as_bytes());
        RunManifest {
            run_id: config_hash[..16].to_string(),
            command: command.into(),
            config_hash,
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            started_at,
            finished_at: started_at,
            suites: BTreeMap::new(),
        }
    }

    pub fn write(&mut self, dir: &Path) -> Result<(), CliError> {
        self.finished_at = now();
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Runtime(e.to_string()))?;
        write_atomic(&dir.join(MANIFEST), text.as_bytes()).map_err(CliError::from_core)
    }

    pub fn read(dir: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(dir.join(MANIFEST))
            .map_err(|e| CliError::Runtime(format!("cannot read manifest in `{}`: {e}", dir.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Runtime(format!("corrupt manifest: {e}")))
    }

    /// Whether the stored hash matches the `config.echo` next to it.
    pub fn verify(&self, dir: &Path) -> Result<bool, CliError> {
        let echo = std::fs::read(dir.join(CONFIG_ECHO))
            .map_err(|e| CliError::Runtime(format!("cannot read {CONFIG_ECHO}: {e}")))?;
        Ok(sha256_hex(&echo) == self.config_hash)
    }
}

/// Write `config.echo`, returning the manifest that hashes it.
pub fn start_run(dir: &Path, command: &str, echo: &str) -> Result<RunManifest, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Usage(format!("cannot create output directory `{}`: {e}", dir.display())))?;
    write_atomic(&dir.join(CONFIG_ECHO), echo.as_bytes()).map_err(CliError::from_core)?;
    Ok(RunManifest::new(command, echo, now()))
}
