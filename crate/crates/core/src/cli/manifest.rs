//! `manifest.json`: what each stage produced, with content hashes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the run directory, with `/` separators.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StageRecord {
    pub config_hash: String,
    pub started_at: String,
    pub finished_at: String,
    pub counts: BTreeMap<String, usize>,
    /// Number of failed items recorded by the stage.
    pub errors: usize,
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub stages: BTreeMap<String, StageRecord>,
}

impl Default for Manifest {
    fn default() -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            stages: BTreeMap::new(),
        }
    }
}

pub fn sha256_file(path: &Path) -> std::io::Result<(String, u64)> {
    let mut f = fs::File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
        total += n as u64;
    }
    Ok((hex::encode(h.finalize()), total))
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

impl Manifest {
    pub fn load(run_dir: &Path) -> Result<Self, CliError> {
        let path = run_dir.join(MANIFEST_FILE);
        match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("corrupt manifest {}: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(CliError::Data(format!("cannot read {}: {e}", path.display()))),
        }
    }

    pub fn save(&self, run_dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        let tmp = run_dir.join(format!("{MANIFEST_FILE}.tmp"));
        fs::write(&tmp, text + "\n").and_then(|_| fs::rename(&tmp, run_dir.join(MANIFEST_FILE)))?;
        Ok(())
    }

    /// The record of a completed stage, or `MissingArtifact`.
    pub fn require(&self, stage: &str) -> Result<&StageRecord, CliError> {
        self.stages
            .get(stage)
            .ok_or_else(|| CliError::MissingArtifact(stage.to_string()))
    }

    /// Artifact paths of `stage`, resolved against `run_dir`.
    pub fn artifact_paths(&self, run_dir: &Path, stage: &str) -> Result<Vec<PathBuf>, CliError> {
        Ok(self.require(stage)?.artifacts.iter().map(|a| run_dir.join(&a.path)).collect())
    }

    /// True if `stage` ran with this config and its artifacts are unchanged.
    pub fn is_current(&self, run_dir: &Path, stage: &str, config_hash: &str) -> bool {
        let Some(rec) = self.stages.get(stage) else {
            return false;
        };
        rec.config_hash == config_hash
            && rec.artifacts.iter().all(|a| {
                sha256_file(&run_dir.join(&a.path)).is_ok_and(|(h, _)| h == a.sha256)
            })
    }
}

/// Hashes `files` (absolute or run-relative) into artifact entries.
pub fn artifacts(run_dir: &Path, files: &[PathBuf]) -> Result<Vec<Artifact>, CliError> {
    let mut out = Vec::with_capacity(files.len());
    for f in files {
        let abs = if f.is_absolute() { f.clone() } else { run_dir.join(f) };
        let (sha256, bytes) = sha256_file(&abs)?;
        let rel = abs.strip_prefix(run_dir).unwrap_or(&abs);
        let path = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        out.push(Artifact { path, sha256, bytes });
    }
    out.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}
