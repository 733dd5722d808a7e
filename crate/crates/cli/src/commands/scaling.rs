use std::path::PathBuf;

use jdai::controller::{scaling_report, ChannelSpec, ScalingRequest, ScalingRow, ScalingTarget};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{Common, Format};
use crate::config;
use crate::error::CliResult;
use crate::output::{csv_bytes, document, write_atomic, write_json};
use crate::svg::{line_chart, Series};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub targets: Vec<ScalingTarget>,
    pub channel: ChannelSpec,
    /// Bound on `lambda1 + lambda2` for a row to count as feasible.
    #[serde(default = "default_budget")]
    pub error_budget: f64,
    #[serde(default = "default_population")]
    pub population: u64,
    #[serde(default = "default_max_reps")]
    pub max_reps: usize,
    #[serde(default = "default_trials")]
    pub mc_trials: u64,
    #[serde(default = "default_pair_sample")]
    pub pair_sample: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_budget() -> f64 {
    0.5
}
fn default_population() -> u64 {
    100_000
}
fn default_max_reps() -> usize {
    7
}
fn default_trials() -> u64 {
    2_000
}
fn default_pair_sample() -> u64 {
    200
}

pub fn evaluate(cfg: &ScalingConfig) -> CliResult<Vec<ScalingRow>> {
    let req = ScalingRequest {
        targets: cfg.targets.clone(),
        channel: cfg.channel.build()?,
        error_budget: cfg.error_budget,
        population: cfg.population,
        max_reps: cfg.max_reps,
        mc_trials: cfg.mc_trials,
        pair_sample: cfg.pair_sample,
        seed: cfg.seed,
    };
    Ok(scaling_report(&req)?)
}

/// `log2 N`, `log2 log2 N` and the addressing baseline against payload bits.
pub fn chart(rows: &[ScalingRow]) -> String {
    let pts = |f: fn(&ScalingRow) -> f64| rows.iter().map(|r| (r.payload_bits as f64, f(r))).collect();
    line_chart(
        "Identity count vs payload",
        "payload bits (before inner code)",
        "bits",
        &[
            Series { label: "log2 N", color: "#1f77b4", points: pts(|r| r.log2_identities) },
            Series { label: "log2 log2 N", color: "#d62728", points: pts(|r| r.log2_log2_identities) },
            Series { label: "addressing baseline", color: "#7f7f7f", points: pts(|r| f64::from(r.baseline_bits)) },
        ],
    )
}

pub fn run(common: &Common) -> CliResult<Vec<PathBuf>> {
    let mut cfg: ScalingConfig = config::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let rows = evaluate(&cfg)?;
    let table = match common.format {
        Format::Csv => write_atomic(&common.out.join("scaling.csv"), &csv_bytes(&rows)?)?,
        Format::Json => {
            write_json(&common.out.join("scaling.json"), &document("scaling", &cfg, json!({ "rows": rows }))?)?
        }
    };
    let svg = write_atomic(&common.out.join("scaling.svg"), chart(&rows).as_bytes())?;
    Ok(vec![table, svg])
}
