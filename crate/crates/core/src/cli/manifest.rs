use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::{canonical, SCHEMA_VERSION};
use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Pass,
    Fail,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub status: StageStatus,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub version: String,
    pub config_hash: String,
    pub created_unix: u64,
    pub stages: BTreeMap<String, StageRecord>,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Pretty JSON with sorted keys and a trailing newline, so that parsing and
/// re-serializing reproduces the same bytes.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let value = canonical(&serde_json::to_value(value)?);
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_canonical_json(value)?)?;
    Ok(())
}

impl Manifest {
    fn fresh(config_hash: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash.to_string(),
            created_unix: unix_now(),
            stages: BTreeMap::new(),
        }
    }

    /// The manifest in `dir`, or a new one when it is missing, unreadable or
    /// belongs to a different config.
    pub fn open(dir: &Path, config_hash: &str) -> Self {
        std::fs::read_to_string(dir.join(MANIFEST_FILE))
            .ok()
            .and_then(|text| serde_json::from_str::<Manifest>(&text).ok())
            .filter(|m| m.config_hash == config_hash)
            .unwrap_or_else(|| Self::fresh(config_hash))
    }

    pub fn record(&mut self, stage: &str, record: StageRecord) {
        self.stages.insert(stage.to_string(), record);
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(MANIFEST_FILE), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_byte_for_byte() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = Manifest::open(dir.path(), "abc");
        m.record(
            "sample",
            StageRecord {
                status: StageStatus::Warning,
                started_unix: 1,
                finished_unix: 2,
                outputs: vec!["batch.bin".into()],
                seed: Some(7),
            },
        );
        m.save(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        let parsed: Manifest = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, m);
        assert_eq!(to_canonical_json(&parsed).unwrap(), text);
        assert_eq!(Manifest::open(dir.path(), "abc"), m);
        assert!(Manifest::open(dir.path(), "other").stages.is_empty());
    }
}
