//! Write-once workspace directories and artifact metadata.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

/// Refusal to replace an existing artifact. Leaves the stage untouched, so
/// no failure marker is written.
#[derive(Debug)]
pub struct ArtifactExists(pub PathBuf);

impl std::fmt::Display for ArtifactExists {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "artifact {} already exists; rerun with --force to replace it", self.0.display())
    }
}

impl std::error::Error for ArtifactExists {}

/// Metadata written next to every stage output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub command: String,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub tool_version: String,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub gates: BTreeMap<String, bool>,
}

/// Hex SHA-256 of the canonical JSON form of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

pub struct Workspace {
    pub root: PathBuf,
    pub force: bool,
}

impl Workspace {
    pub fn new(root: PathBuf, force: bool) -> Self {
        Workspace { root, force }
    }

    pub fn dir(&self, stage: &str) -> PathBuf {
        self.root.join(stage)
    }

    pub fn path(&self, stage: &str, name: &str) -> PathBuf {
        self.dir(stage).join(name)
    }

    pub fn stage<T: Serialize>(&self, stage: &'static str, command: &str, seed: Option<u64>, config: &T) -> Result<Stage<'_>> {
        fs::create_dir_all(self.dir(stage)).with_context(|| format!("creating {}", self.dir(stage).display()))?;
        Ok(Stage {
            ws: self,
            stage,
            meta: ArtifactMeta {
                command: command.to_string(),
                seed,
                config_hash: config_hash(config)?,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                config: serde_json::to_value(config)?,
                outputs: Vec::new(),
                gates: BTreeMap::new(),
            },
        })
    }
}

/// Outputs of one command in one stage directory.
pub struct Stage<'a> {
    ws: &'a Workspace,
    stage: &'static str,
    pub meta: ArtifactMeta,
}

impl Stage<'_> {
    /// Reserves `name` for writing. Refuses to replace an existing artifact
    /// unless the workspace was opened with `--force`.
    pub fn target(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.ws.path(self.stage, name);
        if path.exists() && !self.ws.force {
            return Err(ArtifactExists(path).into());
        }
        self.meta.outputs.push(format!("{}/{name}", self.stage));
        Ok(path)
    }

    pub fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.target(name)?;
        Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
    }

    pub fn gate(&mut self, name: &str, passed: bool) {
        self.meta.gates.insert(name.to_string(), passed);
    }

    pub fn failed_gates(&self) -> Vec<String> {
        self.meta.gates.iter().filter(|(_, &ok)| !ok).map(|(k, _)| k.clone()).collect()
    }

    /// Writes `<meta_name>.meta.json` and clears a stale failure marker.
    pub fn finish(mut self, meta_name: &str) -> Result<ArtifactMeta> {
        let file = format!("{meta_name}.meta.json");
        let path = self.target(&file)?;
        self.meta.outputs.pop();
        fs::write(&path, serde_json::to_string_pretty(&self.meta)? + "\n")?;
        let marker = failure_marker(&self.ws.dir(self.stage), meta_name);
        if marker.exists() {
            fs::remove_file(marker)?;
        }
        Ok(self.meta)
    }
}

pub fn failure_marker(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.failed"))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash(&serde_json::json!({"n": 5, "seed": 1})).unwrap();
        assert_eq!(a, config_hash(&serde_json::json!({"n": 5, "seed": 1})).unwrap());
        assert_ne!(a, config_hash(&serde_json::json!({"n": 5, "seed": 2})).unwrap());
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn stages_refuse_to_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::new(dir.path().to_path_buf(), false);
        let mut s = ws.stage("params", "sample", Some(1), &1u32).unwrap();
        std::fs::write(s.target("a.csv").unwrap(), "x").unwrap();
        assert!(s.target("a.csv").is_err());
        let forced = Workspace::new(dir.path().to_path_buf(), true);
        let mut s = forced.stage("params", "sample", Some(1), &1u32).unwrap();
        assert!(s.target("a.csv").is_ok());
    }
}
