//! Run manifests: everything needed to reproduce a run on the same inputs —
//! the fully resolved config, input digests, seeds — plus wall-clock timings
//! and digests of the emitted reports.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    /// The resolved configuration this run executed.
    pub config: RunConfig,
    /// Input file → hex SHA-256.
    pub data_digests: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    /// Stage name → wall-clock milliseconds.
    pub stages_ms: BTreeMap<String, u128>,
    /// Emitted file → hex SHA-256.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let body = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let manifest: RunManifest = serde_json::from_str(&body)
            .with_context(|| format!("parsing manifest {}", path.display()))?;
        if manifest.schema_version != MANIFEST_SCHEMA_VERSION {
            anyhow::bail!(
                "manifest {} has schema version {}, expected {MANIFEST_SCHEMA_VERSION}",
                path.display(),
                manifest.schema_version
            );
        }
        Ok(manifest)
    }
}
