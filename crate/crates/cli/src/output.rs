use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use tempfile::NamedTempFile;

use crate::error::CliResult;

/// Version label recorded in every output document.
pub const VERSION: &str = concat!("jdai ", env!("JDAI_BUILD_VERSION"));

/// Writes `bytes` to `path` through a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<PathBuf> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(path.to_path_buf())
}

/// Output document: version, wall-clock timestamp, the producing command and its config.
pub fn document<C: Serialize>(command: &str, config: &C, body: Value) -> CliResult<Value> {
    let mut doc = json!({
        "version": VERSION,
        "generated_at": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        "command": command,
        "config": serde_json::to_value(config).map_err(|e| crate::CliError::Runtime(e.to_string()))?,
    });
    if let (Value::Object(map), Value::Object(extra)) = (&mut doc, body) {
        map.extend(extra);
    }
    Ok(doc)
}

pub fn write_json(path: &Path, value: &Value) -> CliResult<PathBuf> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| crate::CliError::Runtime(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn csv_bytes<R: Serialize>(rows: &[R]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| crate::CliError::Runtime(e.to_string()))
}

/// Shortest round-trip rendering; empty when absent.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
