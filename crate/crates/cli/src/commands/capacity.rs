use std::path::PathBuf;

use jdai::channel::{capacity_bsc, capacity_iterative, BscParams};
use jdai::controller::ChannelSpec;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{Common, Format};
use crate::config;
use crate::error::CliResult;
use crate::output::{csv_bytes, document, write_atomic, write_json};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedChannel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub channel: ChannelSpec,
}

/// `channels` are evaluated first, then one BSC per `bsc_grid` crossover.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    #[serde(default)]
    pub channels: Vec<NamedChannel>,
    #[serde(default)]
    pub bsc_grid: Vec<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub name: String,
    pub inputs: usize,
    pub outputs: usize,
    pub closed_form: Option<f64>,
    pub iterative: f64,
    pub upper_bound: f64,
    pub difference: Option<f64>,
    pub iterations: usize,
}

pub fn evaluate(cfg: &CapacityConfig) -> CliResult<Vec<CapacityRow>> {
    let grid = cfg.bsc_grid.iter().map(|&p| NamedChannel { name: None, channel: ChannelSpec::Bsc(p) });
    let mut rows = Vec::new();
    for (i, entry) in cfg.channels.iter().cloned().chain(grid).enumerate() {
        let ch = entry.channel.build()?;
        let est = capacity_iterative(&ch, cfg.tolerance)?;
        let closed_form = match entry.channel {
            ChannelSpec::Bsc(p) => Some(capacity_bsc(&BscParams::new(p)?)),
            ChannelSpec::Dmc(_) => None,
        };
        let name = entry.name.unwrap_or_else(|| match entry.channel {
            ChannelSpec::Bsc(p) => format!("bsc({p})"),
            ChannelSpec::Dmc(_) => format!("channel{i}"),
        });
        rows.push(CapacityRow {
            name,
            inputs: ch.inputs(),
            outputs: ch.outputs(),
            closed_form,
            iterative: est.capacity,
            upper_bound: est.upper_bound,
            difference: closed_form.map(|c| est.capacity - c),
            iterations: est.iterations,
        });
    }
    Ok(rows)
}

pub fn run(common: &Common) -> CliResult<Vec<PathBuf>> {
    let cfg: CapacityConfig = config::load(&common.config)?;
    let rows = evaluate(&cfg)?;
    let path = match common.format {
        Format::Csv => write_atomic(&common.out.join("capacity.csv"), &csv_bytes(&rows)?)?,
        Format::Json => {
            write_json(&common.out.join("capacity.json"), &document("capacity", &cfg, json!({ "rows": rows }))?)?
        }
    };
    Ok(vec![path])
}
