use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
        Ok(FileDigest {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

/// Everything needed to re-run a command: pass the manifest back through
/// `--config` to reproduce the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Fully resolved config.
    pub config: Value,
    pub seed: Option<u64>,
    pub threads: usize,
    pub started: String,
    pub finished: String,
    /// `ok`, `pass` or `fail`.
    pub status: String,
    #[serde(default)]
    pub inputs: Vec<FileDigest>,
    /// Paths relative to the output directory.
    pub outputs: Vec<FileDigest>,
    #[serde(default)]
    pub notes: BTreeMap<String, Value>,
}

/// Collects output files and run metadata for one command.
pub struct Run {
    pub command: String,
    pub out: PathBuf,
    started: String,
    inputs: Vec<FileDigest>,
    /// Relative to `out`.
    outputs: Vec<String>,
    pub notes: BTreeMap<String, Value>,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl Run {
    pub fn start(command: &str, out: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
        Ok(Run {
            command: command.into(),
            out: out.to_path_buf(),
            started: now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            notes: BTreeMap::new(),
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<(), Failure> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(())
    }

    /// Path for an output file, registered for hashing.
    pub fn output(&mut self, name: &str) -> Result<PathBuf, Failure> {
        let p = self.out.join(name);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        }
        self.outputs.push(name.into());
        Ok(p)
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.notes.insert(key.into(), serde_json::to_value(value).expect("plain data serializes"));
    }

    pub fn finish(self, config: &impl Serialize, seed: Option<u64>, status: &str) -> Result<PathBuf, Failure> {
        let outputs = self
            .outputs
            .iter()
            .map(|name| {
                FileDigest::of(&self.out.join(name)).map(|d| FileDigest {
                    path: name.into(),
                    ..d
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command,
            config: serde_json::to_value(config).map_err(|e| Failure::runtime(e.to_string()))?,
            seed,
            threads: rayon::current_num_threads(),
            started: self.started,
            finished: now(),
            status: status.into(),
            inputs: self.inputs,
            outputs,
            notes: self.notes,
        };
        let path = self.out.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::runtime(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| Failure::io(&path, e))?;
        Ok(path)
    }
}
