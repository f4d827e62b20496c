//! Run manifest: which stage wrote which artifact, with checksums, so that
//! unchanged stages are skipped and hand-edited artifacts are caught.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Executed,
    Cached,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the output directory for pipeline artifacts, absolute
    /// for external inputs.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub status: StageStatus,
    pub seed: u64,
    /// Digest of the stage's parameters and seed.
    pub params_sha256: String,
    pub inputs: Vec<Artifact>,
    pub outputs: Vec<Artifact>,
}

/// Timings live in a separate file so the manifest stays byte-identical
/// across reruns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: serde_json::Value,
    pub stages: BTreeMap<String, StageRecord>,
}

impl RunManifest {
    pub fn new(config: serde_json::Value) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            stages: BTreeMap::new(),
        }
    }

    /// Read the manifest of `dir`, or start a new one. Stage records are
    /// kept even when the config changed; their parameter digests decide
    /// whether they still apply.
    pub fn open(dir: &Path, config: serde_json::Value) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(Self::new(config));
        }
        let raw = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let mut m: RunManifest = serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()))?;
        m.config = config;
        m.tool_version = env!("CARGO_PKG_VERSION").to_string();
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(MANIFEST_FILE), self)
    }

    /// The stage whose recorded outputs include `artifact`.
    pub fn producer(&self, artifact: &str) -> Option<(&str, &Artifact)> {
        self.stages
            .iter()
            .find_map(|(name, r)| r.outputs.iter().find(|a| a.path == artifact).map(|a| (name.as_str(), a)))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()))
}
