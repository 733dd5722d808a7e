//! Cartesian sweeps of closed-loop runs with a resumable manifest.
//!
//! Each completed (cell, replicate) is appended to `sweep.manifest.jsonl` as soon as it
//! finishes. A rerun with the same sweep config skips recorded entries; the final table is
//! rebuilt from the manifest in canonical (cell, replicate) order, so it does not depend on
//! completion order or on how many times the sweep was interrupted.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use jdai::controller::{RunConfig, RunMetrics};
use jdai::rng::derive_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::{Common, Format};
use crate::commands::simulate;
use crate::config::{self, set_path};
use crate::error::{CliError, CliResult};
use crate::output::{document, fmt_opt, write_atomic, write_json};

pub const DEFAULT_MAX_CELLS: u64 = 10_000;
pub const MANIFEST: &str = "sweep.manifest.jsonl";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Simulate config every cell starts from.
    pub base: RunConfig,
    /// Dotted config path (for example `code.inner_reps`) to the values it takes.
    pub parameters: BTreeMap<String, Vec<Value>>,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    #[serde(default = "default_max_cells")]
    pub max_cells: u64,
}

fn default_replicates() -> u64 {
    1
}

fn default_max_cells() -> u64 {
    DEFAULT_MAX_CELLS
}

/// One grid point: its index in canonical order and the value chosen for each parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub index: u64,
    pub values: Vec<Value>,
    pub config: RunConfig,
}

const METRIC_COLUMNS: [&str; 17] = [
    "target_devices",
    "off_target_devices",
    "broadcast_count",
    "bits_per_broadcast",
    "missed_activations",
    "false_activations",
    "missed_activation_rate",
    "false_activation_rate",
    "predicted_missed_rate",
    "predicted_false_rate",
    "missed_sigma",
    "false_sigma",
    "missed_z",
    "false_z",
    "first_activations",
    "on_target_dose",
    "off_target_dose",
];

pub fn header(cfg: &SweepConfig) -> Vec<String> {
    ["cell", "replicate", "run_seed"]
        .into_iter()
        .map(String::from)
        .chain(cfg.parameters.keys().cloned())
        .chain(METRIC_COLUMNS.iter().map(|s| s.to_string()))
        .collect()
}

/// Expands the grid, rejecting it when it exceeds `max_cells` or any cell fails to parse.
pub fn cells(cfg: &SweepConfig) -> CliResult<Vec<Cell>> {
    if cfg.replicates == 0 {
        return Err(CliError::Config("replicates must be at least 1".into()));
    }
    let count = cfg.parameters.values().try_fold(1u64, |acc, v| acc.checked_mul(v.len() as u64)).unwrap_or(u64::MAX);
    if count > cfg.max_cells {
        return Err(CliError::Feasibility(format!("sweep grid has {count} cells, above the cap of {}", cfg.max_cells)));
    }
    let base = serde_json::to_value(&cfg.base).map_err(|e| CliError::Runtime(e.to_string()))?;
    let dims: Vec<(&String, &Vec<Value>)> = cfg.parameters.iter().collect();
    (0..count)
        .map(|index| {
            let mut rest = index;
            let mut values = vec![Value::Null; dims.len()];
            for (slot, (_, options)) in dims.iter().enumerate().rev() {
                let n = options.len() as u64;
                values[slot] = options[(rest % n) as usize].clone();
                rest /= n;
            }
            let mut doc = base.clone();
            for ((path, _), v) in dims.iter().zip(&values) {
                set_path(&mut doc, path, v.clone())?;
            }
            let config: RunConfig =
                config::from_value(doc).map_err(|e| CliError::Config(format!("sweep cell {index}: {e}")))?;
            Ok(Cell { index, values, config })
        })
        .collect()
}

fn display(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn metric_fields(m: &RunMetrics) -> Vec<String> {
    let p = m.predicted;
    let num = |x: u64| x.to_string();
    vec![
        num(m.target_devices),
        num(m.off_target_devices),
        num(m.broadcast_count),
        num(m.bits_per_broadcast),
        num(m.missed_activations),
        num(m.false_activations),
        m.missed_activation_rate.to_string(),
        m.false_activation_rate.to_string(),
        fmt_opt(p.map(|p| p.missed_activation_rate)),
        fmt_opt(p.map(|p| p.false_activation_rate)),
        fmt_opt(p.map(|p| p.missed_sigma)),
        fmt_opt(p.map(|p| p.false_sigma)),
        fmt_opt(p.map(|p| p.missed_z)),
        fmt_opt(p.map(|p| p.false_z)),
        num(m.first_activations),
        num(m.on_target_dose),
        num(m.off_target_dose),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Entry {
    cell: u64,
    replicate: u64,
    fields: Vec<String>,
}

/// Reads completed entries; a torn trailing line from an interrupted write is dropped.
fn read_manifest(path: &Path, fingerprint: &str) -> CliResult<Vec<Entry>> {
    let Ok(text) = fs::read_to_string(path) else {
        return Ok(Vec::new());
    };
    let mut lines = text.lines();
    match lines.next().map(serde_json::from_str::<Value>) {
        None => return Ok(Vec::new()),
        Some(Ok(v)) if v.get("sweep").and_then(Value::as_str) == Some(fingerprint) => {}
        Some(_) => {
            return Err(CliError::Config(format!(
                "{} was written by a different sweep config; remove it or use another --out",
                path.display()
            )))
        }
    }
    let rest: Vec<&str> = lines.collect();
    let mut entries = Vec::new();
    for (i, line) in rest.iter().enumerate() {
        match serde_json::from_str::<Entry>(line) {
            Ok(e) => entries.push(e),
            Err(_) if i + 1 == rest.len() => {}
            Err(e) => return Err(CliError::Runtime(format!("{}: line {}: {e}", path.display(), i + 2))),
        }
    }
    Ok(entries)
}

fn manifest_text(fingerprint: &str, entries: &[Entry]) -> CliResult<String> {
    let mut text = json!({ "sweep": fingerprint }).to_string();
    text.push('\n');
    for e in entries {
        text.push_str(&serde_json::to_string(e).map_err(|e| CliError::Runtime(e.to_string()))?);
        text.push('\n');
    }
    Ok(text)
}

/// Runs every pending (cell, replicate) and returns all rows in canonical order.
pub fn execute(cfg: &SweepConfig, out: &Path) -> CliResult<Vec<Vec<String>>> {
    let cells = cells(cfg)?;
    let fingerprint = serde_json::to_string(cfg).map_err(|e| CliError::Runtime(e.to_string()))?;
    let manifest_path = out.join(MANIFEST);
    let mut done: BTreeMap<(u64, u64), Vec<String>> = BTreeMap::new();
    for e in read_manifest(&manifest_path, &fingerprint)? {
        if e.cell < cells.len() as u64 && e.replicate < cfg.replicates {
            done.insert((e.cell, e.replicate), e.fields);
        }
    }
    // Rewrite without any torn tail before appending.
    let existing: Vec<Entry> =
        done.iter().map(|(&(cell, replicate), fields)| Entry { cell, replicate, fields: fields.clone() }).collect();
    write_atomic(&manifest_path, manifest_text(&fingerprint, &existing)?.as_bytes())?;

    let recorded: BTreeSet<(u64, u64)> = done.keys().copied().collect();
    let pending: Vec<(&Cell, u64)> = cells
        .iter()
        .flat_map(|c| (0..cfg.replicates).map(move |r| (c, r)))
        .filter(|(c, r)| !recorded.contains(&(c.index, *r)))
        .collect();
    let manifest = Mutex::new(OpenOptions::new().append(true).open(&manifest_path)?);
    let results: Vec<CliResult<Entry>> = pending
        .par_iter()
        .map(|&(cell, replicate)| {
            let mut run_cfg = cell.config.clone();
            run_cfg.seed = derive_seed(run_cfg.seed, &[replicate]);
            let output = simulate::execute(&run_cfg)
                .map_err(|e| CliError::Runtime(format!("sweep cell {} replicate {replicate}: {e}", cell.index)))?;
            let mut fields = vec![cell.index.to_string(), replicate.to_string(), run_cfg.seed.to_string()];
            fields.extend(cell.values.iter().map(display));
            fields.extend(metric_fields(&output.summary));
            let entry = Entry { cell: cell.index, replicate, fields };
            let line = serde_json::to_string(&entry).map_err(|e| CliError::Runtime(e.to_string()))?;
            let mut file = manifest.lock().expect("manifest lock");
            writeln!(file, "{line}")?;
            file.flush()?;
            Ok(entry)
        })
        .collect();
    for r in results {
        let e = r?;
        done.insert((e.cell, e.replicate), e.fields);
    }
    Ok(done.into_values().collect())
}

pub fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn run(common: &Common) -> CliResult<Vec<PathBuf>> {
    let mut cfg: SweepConfig = config::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.base.seed = seed;
    }
    let rows = execute(&cfg, &common.out)?;
    let header = header(&cfg);
    let table = match common.format {
        Format::Csv => write_atomic(&common.out.join("sweep.csv"), &csv_bytes(&header, &rows)?)?,
        Format::Json => {
            let objects: Vec<BTreeMap<&str, &str>> = rows
                .iter()
                .map(|r| header.iter().map(String::as_str).zip(r.iter().map(String::as_str)).collect())
                .collect();
            write_json(
                &common.out.join("sweep.json"),
                &document("sweep", &cfg, json!({ "header": header, "rows": objects }))?,
            )?
        }
    };
    Ok(vec![table, common.out.join(MANIFEST)])
}
