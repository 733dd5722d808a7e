use std::path::PathBuf;

use jdai::controller::{write_metrics_csv, RunConfig, RunOutput, Simulation};
use serde_json::json;

use crate::args::{Common, Format};
use crate::config;
use crate::error::{CliError, CliResult};
use crate::output::{document, write_atomic, write_json};

pub fn load(common: &Common) -> CliResult<RunConfig> {
    let mut cfg: RunConfig = config::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Builds the simulation (validating graph, sensor and code) and runs every epoch.
pub fn execute(cfg: &RunConfig) -> CliResult<RunOutput> {
    if cfg.code.is_none() {
        return Err(CliError::Config("simulate requires a `code` section".into()));
    }
    let mut sim = Simulation::new(cfg.clone())?;
    Ok(sim.run()?)
}

pub fn metrics_csv(out: &RunOutput) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write_metrics_csv(&mut buf, &out.epochs)?;
    Ok(buf)
}

pub fn run(common: &Common) -> CliResult<Vec<PathBuf>> {
    let cfg = load(common)?;
    let out = execute(&cfg)?;
    let metrics = match common.format {
        Format::Csv => write_atomic(&common.out.join("metrics.csv"), &metrics_csv(&out)?)?,
        Format::Json => {
            write_json(&common.out.join("metrics.json"), &document("simulate", &cfg, json!({ "epochs": out.epochs }))?)?
        }
    };
    let summary =
        write_json(&common.out.join("summary.json"), &document("simulate", &cfg, json!({ "metrics": out.summary }))?)?;
    Ok(vec![metrics, summary])
}
