//! Run manifests: a deterministic record of what a command did, written
//! beside its outputs. Path-valued flags are recorded by file name and by a
//! digest of the file's bytes, so two runs over the same data produce the
//! same manifest no matter where the files live.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
struct InputDigest {
    name: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    version: String,
    config: BTreeMap<String, String>,
    inputs: BTreeMap<String, InputDigest>,
}

pub struct ManifestBuilder {
    command: String,
    config: BTreeMap<String, String>,
    inputs: BTreeMap<String, InputDigest>,
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            config: BTreeMap::new(),
            inputs: BTreeMap::new(),
        }
    }

    pub fn flag(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.insert(key.to_string(), value.to_string());
        self
    }

    /// Records a path flag as its base name plus a content digest.
    pub fn input(&mut self, key: &str, path: &Path) -> Result<&mut Self> {
        let bytes = fs::read(path)
            .with_context(|| format!("reading input `{}`", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.inputs
            .insert(key.to_string(), InputDigest { name, sha256: hex });
        Ok(self)
    }

    /// Writes `<command>.manifest.json` into the chosen directory.
    pub fn write(&self, manifest_dir: &Path) -> Result<PathBuf> {
        let manifest = Manifest {
            command: self.command.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: self.config.clone(),
            inputs: self
                .inputs
                .iter()
                .map(|(k, v)| {
                    (
                        k.clone(),
                        InputDigest {
                            name: v.name.clone(),
                            sha256: v.sha256.clone(),
                        },
                    )
                })
                .collect(),
        };
        fs::create_dir_all(manifest_dir)?;
        let path = manifest_dir.join(format!("{}.manifest.json", self.command));
        let mut body = serde_json::to_string_pretty(&manifest)?;
        body.push('\n');
        fs::write(&path, body)?;
        Ok(path)
    }
}

/// Manifest directory: the explicit flag when given, otherwise the directory
/// holding the command's primary output.
pub fn manifest_dir(explicit: &Option<PathBuf>, primary_out: &Path) -> PathBuf {
    if let Some(dir) = explicit {
        return dir.clone();
    }
    let parent = primary_out.parent().unwrap_or_else(|| Path::new("."));
    if parent.as_os_str().is_empty() {
        PathBuf::from(".")
    } else {
        parent.to_path_buf()
    }
}
