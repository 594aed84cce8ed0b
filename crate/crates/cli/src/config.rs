//! Run configuration: a JSON tree from `--config`, dotted `--set` overrides,
//! `{"linspace": [start, stop, num]}` grid shorthands, then typed decoding.

use std::path::{Path, PathBuf};

use aqrm_core::Truncation;
use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[serde(alias = "json-lines")]
    Jsonl,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Typed configuration of one scan command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig<G> {
    pub grid: G,
    pub truncation: Truncation,
    pub workers: usize,
    pub output: OutputSpec,
}

pub fn load_tree(path: Option<&Path>) -> Result<Value, String> {
    let Some(path) = path else {
        return Ok(Value::Object(Map::new()));
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if !v.is_object() {
        return Err(format!("{}: top level must be an object", path.display()));
    }
    Ok(v)
}

/// Applies `a.b.c=value`; the value is parsed as JSON, falling back to a string.
pub fn apply_set(tree: &mut Value, assignment: &str) -> Result<(), String> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| format!("--set {assignment}: expected key=value"))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(format!("--set {assignment}: empty key segment"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = tree;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let obj = node.as_object_mut().ok_or_else(|| format!("--set {key}: {part} is not inside an object"))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = node.as_object_mut().ok_or_else(|| format!("--set {key}: parent is not an object"))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Replaces every `{"linspace": [start, stop, num]}` by the explicit list.
pub fn expand_linspace(v: &mut Value) -> Result<(), String> {
    match v {
        Value::Object(obj) => {
            if obj.len() == 1 {
                if let Some(spec) = obj.get("linspace") {
                    let arr = spec.as_array().filter(|a| a.len() == 3).ok_or("linspace needs [start, stop, num]")?;
                    let (a, b) = (arr[0].as_f64(), arr[1].as_f64());
                    let n = arr[2].as_u64();
                    let (Some(a), Some(b), Some(n)) = (a, b, n) else {
                        return Err(format!("linspace {spec}: need two numbers and a non-negative integer"));
                    };
                    let pts = aqrm_core::scan::linspace(a, b, n as usize);
                    *v = Value::Array(pts.into_iter().map(Value::from).collect());
                    return Ok(());
                }
            }
            obj.values_mut().try_for_each(expand_linspace)
        }
        Value::Array(a) => a.iter_mut().try_for_each(expand_linspace),
        _ => Ok(()),
    }
}

/// Merges defaults, file and overrides, then decodes.
pub fn resolve<G>(tree: Value, default_truncation: Truncation) -> Result<RunConfig<G>, String>
where
    G: Default + Serialize + DeserializeOwned,
{
    let defaults = RunConfig { grid: G::default(), truncation: default_truncation, workers: 1, output: OutputSpec::default() };
    let mut merged = serde_json::to_value(&defaults).map_err(|e| e.to_string())?;
    merge(&mut merged, tree);
    expand_linspace(&mut merged)?;
    let cfg: RunConfig<G> = serde_json::from_value(merged).map_err(|e| format!("config: {e}"))?;
    cfg.truncation.validate().map_err(|e| format!("truncation: {e}"))?;
    if cfg.workers == 0 {
        return Err("workers: must be >= 1".into());
    }
    Ok(cfg)
}

/// Deep merge: objects merge key by key, everything else is replaced.
fn merge(base: &mut Value, over: Value) {
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
