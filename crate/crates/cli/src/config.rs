//! Config ingestion: JSON parsing with error paths, output-document unwrapping, seed override.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Parses a config from a file. See [`parse`].
pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses a config document.
///
/// Output documents written by the CLI (anything carrying both `version` and `config`) are
/// accepted too; their embedded config is used.
pub fn parse<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    from_value(unwrap_document(value))
}

pub fn from_value<T: DeserializeOwned>(value: Value) -> CliResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("at `{path}`: {}", e.into_inner()))
    })
}

fn unwrap_document(value: Value) -> Value {
    match value {
        Value::Object(mut map) if map.contains_key("version") && map.contains_key("config") => {
            map.remove("config").expect("checked key")
        }
        other => other,
    }
}

/// Sets the value at a dotted path such as `code.inner_reps`, creating the last key if absent.
pub fn set_path(root: &mut Value, path: &str, new: Value) -> CliResult<()> {
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), new);
                    return Ok(());
                }
                map.get_mut(*part).ok_or_else(|| CliError::Config(format!("sweep path `{path}`: no key `{part}`")))?
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| CliError::Config(format!("sweep path `{path}`: `{part}` is not an index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| CliError::Config(format!("sweep path `{path}`: index {idx} out of {len}")))?;
                if last {
                    *slot = new;
                    return Ok(());
                }
                slot
            }
            _ => return Err(CliError::Config(format!("sweep path `{path}`: `{part}` is not inside an object"))),
        };
    }
    Err(CliError::Config("empty sweep path".into()))
}
