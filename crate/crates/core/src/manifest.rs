//! Run manifests and atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Write `bytes` to `path` through a temporary file in the same directory,
/// renamed into place once complete.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(FileDigest {
            path: path.to_path_buf(),
            sha256: file_sha256(path)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub parameters: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub created: String,
    pub seed: u64,
    pub dictionary_sha256: Option<String>,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub fn new(seed: u64) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            created: chrono::Utc::now().to_rfc3339(),
            seed,
            dictionary_sha256: None,
            stages: Vec::new(),
        }
    }

    /// Load an existing manifest, or start a fresh one when none exists.
    pub fn load_or_new(path: &Path, seed: u64) -> Result<Self> {
        if !path.exists() {
            return Ok(Self::new(seed));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: RunManifest =
            serde_json::from_str(&text).map_err(|e| Error::Data(format!("bad manifest {}: {e}", path.display())))?;
        m.seed = seed;
        m.created = chrono::Utc::now().to_rfc3339();
        Ok(m)
    }

    /// Record a stage, dropping any earlier record of it and of the
    /// `stale` stages that consumed its outputs.
    pub fn record(&mut self, stage: StageRecord, stale: &[&str]) {
        self.stages
            .retain(|s| s.stage != stage.stage && !stale.contains(&s.stage.as_str()));
        self.stages.push(stage);
    }

    pub fn stage_names(&self) -> Vec<&str> {
        self.stages.iter().map(|s| s.stage.as_str()).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serialises");
        write_atomic(path, json.as_bytes())
    }
}
