//! Config resolution and provenance.
//!
//! Precedence, lowest first: built-in defaults, command-line flags, the
//! `--config` file. Objects merge key by key; any other value replaces what
//! was there.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{arg, Error, Result};

/// First line of every CSV output.
pub const PROVENANCE_PREFIX: &str = "# provenance: ";

pub const TOOL: &str = "masslock";

pub fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

/// Flag values collected as a sparse JSON object.
#[derive(Default)]
pub struct Flags(Map<String, Value>);

impl Flags {
    /// Sets `path` (nested keys) when `v` is present.
    pub fn set<T: Serialize>(&mut self, path: &[&str], v: Option<T>) -> Result<()> {
        let Some(v) = v else { return Ok(()) };
        let mut node = serde_json::to_value(v)?;
        for k in path.iter().rev() {
            let mut m = Map::new();
            m.insert(k.to_string(), node);
            node = Value::Object(m);
        }
        let mut root = Value::Object(std::mem::take(&mut self.0));
        merge(&mut root, node);
        let Value::Object(m) = root else { unreachable!() };
        self.0 = m;
        Ok(())
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }
}

/// A config document and the subcommand it came from, if it records one.
pub struct Loaded {
    pub config: Value,
    pub command: Option<String>,
}

/// Reads a bare config, a JSON output carrying `provenance.config`, or a CSV
/// output whose first line is a provenance comment.
pub fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path)?;
    let first = text.lines().next().unwrap_or("");
    let doc: Value = match first.strip_prefix(PROVENANCE_PREFIX) {
        Some(rest) => serde_json::from_str(rest)?,
        None => serde_json::from_str(&text)?,
    };
    let block = match doc.get("provenance") {
        Some(p) => Some(p.clone()),
        None if doc.get("tool").and_then(Value::as_str) == Some(TOOL) => Some(doc.clone()),
        None => None,
    };
    match block {
        Some(p) => {
            let config = p
                .get("config")
                .cloned()
                .ok_or_else(|| Error::Argument(format!("{}: provenance has no config", path.display())))?;
            Ok(Loaded {
                config,
                command: p.get("command").and_then(Value::as_str).map(str::to_string),
            })
        }
        None => {
            if !doc.is_object() {
                return arg(format!("{}: config must be a JSON object", path.display()));
            }
            Ok(Loaded {
                config: doc,
                command: None,
            })
        }
    }
}

/// Resolves defaults, flags and an optional config file into a typed config
/// and its normalized JSON form.
pub fn resolve<T: DeserializeOwned + Serialize>(
    command: &str,
    defaults: Value,
    flags: Flags,
    config: Option<&Path>,
) -> Result<(T, Value)> {
    let mut v = defaults;
    merge(&mut v, flags.into_value());
    if let Some(path) = config {
        let loaded = load(path)?;
        if let Some(c) = &loaded.command {
            if c != command {
                return arg(format!(
                    "{} was written by `{c}`, not `{command}`",
                    path.display()
                ));
            }
        }
        merge(&mut v, loaded.config);
    }
    let typed: T =
        serde_json::from_value(v).map_err(|e| Error::Argument(format!("config: {e}")))?;
    let normal = serde_json::to_value(&typed)?;
    Ok((typed, normal))
}

/// SHA-256 of the compact JSON text, keys in sorted order.
pub fn config_hash(config: &Value) -> String {
    hex::encode(Sha256::digest(canonical(config).to_string().as_bytes()))
}

fn canonical(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            let mut out = Map::new();
            for k in keys {
                out.insert(k.clone(), canonical(&m[k]));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.iter().map(canonical).collect()),
        other => other.clone(),
    }
}

pub fn provenance(command: &str, config: &Value, seed: Option<u64>) -> Value {
    json!({
        "tool": TOOL,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "config_hash": config_hash(config),
        "config": config,
    })
}
