//! Run manifest, written after every other artifact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::{sha256_file, ArtifactRecord};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub config: ConfigRecord,
    pub seed: u64,
    pub workers: usize,
    pub format: String,
    /// Absolute parameters after shorthand resolution.
    pub resolved: serde_json::Value,
    pub defaults_applied: Vec<String>,
    pub outputs: Vec<ArtifactRecord>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serialises");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Verification(format!("{}: not a run manifest: {e}", path.display())))
    }
}

/// Per-file verification outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FileStatus {
    Ok,
    Missing,
    Mismatch,
}

/// Recomputes every checksum listed in the manifest at `path`; files are
/// looked up next to the manifest.
pub fn verify(path: &Path) -> Result<Vec<(String, FileStatus)>> {
    let manifest = RunManifest::read(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    manifest
        .outputs
        .iter()
        .map(|rec| {
            let file = dir.join(&rec.file);
            let status = if !file.is_file() {
                FileStatus::Missing
            } else {
                let (sha, bytes) = sha256_file(&file)?;
                if sha == rec.sha256 && bytes == rec.bytes {
                    FileStatus::Ok
                } else {
                    FileStatus::Mismatch
                }
            };
            Ok((rec.file.clone(), status))
        })
        .collect()
}
