//! Layered configuration: built-in defaults, then `NLS_SEED`, then a TOML
//! file (or a manifest from an earlier run), then command-line flags.
//!
//! Grammar of the TOML file: top-level keys are the fields of the command's
//! resolved config (the `config` object echoed in every manifest). Tables
//! merge key by key; arrays and scalars replace. A table whose tag
//! (`family`, `kind`, `rule`) differs from the default replaces it whole.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::failure::Failure;
use crate::manifest::RunManifest;

const TAGS: [&str; 3] = ["family", "kind", "rule"];

pub fn merge(base: &mut Value, layer: Value, depth: usize) {
    match (base, layer) {
        (Value::Object(b), Value::Object(l)) => {
            let retag = depth > 0
                && TAGS
                    .iter()
                    .any(|t| l.get(*t).is_some_and(|v| b.get(*t).is_some_and(|w| w != v)));
            if retag {
                *b = l;
                return;
            }
            for (k, v) in l {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v, depth + 1),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, layer) => *slot = layer,
    }
}

/// Contents of `--config`: a TOML table, or the `config` object of a manifest.
pub fn load_layer(path: &Path, command: &str) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    if is_json {
        let manifest: RunManifest = serde_json::from_str(&text)
            .map_err(|e| Failure::usage(format!("{}: not a run manifest: {e}", path.display())))?;
        if manifest.command != command {
            return Err(Failure::usage(format!(
                "{}: manifest was written by `{}`, not `{command}`",
                path.display(),
                manifest.command
            )));
        }
        return Ok(manifest.config);
    }
    let table: toml::Table = toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    serde_json::to_value(table).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Seed default of last resort.
pub fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var("NLS_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| Failure::usage(format!("NLS_SEED={s:?} is not an unsigned integer: {e}"))),
        Err(_) => Ok(None),
    }
}

/// Resolve `defaults <- NLS_SEED <- config file <- flags` into `T`.
pub fn resolve<T: Serialize + DeserializeOwned>(
    defaults: &T,
    command: &str,
    config: Option<&Path>,
    flags: Map<String, Value>,
) -> Result<T, Failure> {
    let mut v = serde_json::to_value(defaults).map_err(|e| Failure::runtime(e.to_string()))?;
    if let (Some(seed), Some(obj)) = (env_seed()?, v.as_object_mut()) {
        if obj.contains_key("seed") {
            obj.insert("seed".into(), seed.into());
        }
        if let Some(series) = obj.get_mut("series").and_then(Value::as_object_mut) {
            series.insert("seed".into(), seed.into());
        }
    }
    if let Some(path) = config {
        let layer = load_layer(path, command)?;
        if !layer.is_object() {
            return Err(Failure::usage(format!("{}: expected a table of settings", path.display())));
        }
        merge(&mut v, layer, 0);
    }
    merge(&mut v, Value::Object(flags), 0);
    serde_json::from_value(v).map_err(|e| {
        let origin = config.map(|p| format!("{}: ", p.display())).unwrap_or_default();
        Failure::usage(format!("{origin}invalid config: {e}"))
    })
}

/// Collects flag overrides, skipping flags that were not given.
#[derive(Default)]
pub struct Overrides(pub Map<String, Value>);

impl Overrides {
    pub fn set<V: Serialize>(&mut self, key: &str, value: Option<V>) -> &mut Self {
        if let Some(v) = value {
            self.0.insert(key.into(), serde_json::to_value(v).expect("plain data serializes"));
        }
        self
    }

    pub fn flag(&mut self, key: &str, on: bool) -> &mut Self {
        if on {
            self.0.insert(key.into(), Value::Bool(true));
        }
        self
    }

    pub fn list<V: Serialize>(&mut self, key: &str, values: &[V]) -> &mut Self {
        if !values.is_empty() {
            self.0.insert(key.into(), serde_json::to_value(values).expect("plain data serializes"));
        }
        self
    }

    pub fn take(&mut self) -> Map<String, Value> {
        std::mem::take(&mut self.0)
    }
}
