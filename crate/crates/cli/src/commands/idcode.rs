use std::path::PathBuf;

use jdai::channel::Dmc;
use jdai::coding::{
    id_errors_mc_pairs, select_pairs, ErrorReport, ExactAnalyzer, IdPair, IdentificationCode, PairCoverage,
    PairSelection, TagCodeSpec, ALL_PAIRS_IDENTITY_LIMIT,
};
use jdai::controller::ChannelSpec;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{Common, Format};
use crate::config;
use crate::error::{CliError, CliResult};
use crate::output::{csv_bytes, document, fmt_opt, write_atomic, write_json};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Exact when the enumeration guard permits, plus Monte Carlo when `mc_trials` is set.
    #[default]
    Auto,
    Exact,
    MonteCarlo,
    Both,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdcodeConfig {
    pub code: TagCodeSpec,
    pub channel: ChannelSpec,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_trials: Option<u64>,
    /// Ordered pairs sampled for the second kind when all pairs are too many.
    #[serde(default = "default_pair_sample")]
    pub pair_sample: u64,
    /// Explicit `[sent, tested]` pairs; overrides `pair_sample`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[u128; 2]>>,
    #[serde(default)]
    pub seed: u64,
    /// Include per-identity and per-pair entries in JSON output.
    #[serde(default)]
    pub entries: bool,
}

fn default_pair_sample() -> u64 {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub q: u64,
    pub k: usize,
    pub inner_reps: usize,
    pub fixed_r: Option<u64>,
    pub channel_p: String,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda1_mean: f64,
    pub lambda2_mean: f64,
    pub lambda1_stderr: String,
    pub lambda2_stderr: String,
    pub trials: Option<u64>,
    pub pair_coverage: PairCoverage,
    pub identities: u64,
    pub pairs: u64,
    pub worst_identity: String,
    pub worst_sent: String,
    pub worst_tested: String,
    pub seed: u64,
}

fn row(cfg: &IdcodeConfig, r: &ErrorReport<f64>) -> ReportRow {
    let id = |x: Option<u128>| x.map(|v| v.to_string()).unwrap_or_default();
    ReportRow {
        method: r.method.as_str().into(),
        q: cfg.code.q,
        k: cfg.code.k,
        inner_reps: cfg.code.inner_reps,
        fixed_r: cfg.code.fixed_r,
        channel_p: match &cfg.channel {
            ChannelSpec::Bsc(p) => p.to_string(),
            ChannelSpec::Dmc(_) => String::new(),
        },
        lambda1: r.lambda1,
        lambda2: r.lambda2,
        lambda1_mean: r.lambda1_mean,
        lambda2_mean: r.lambda2_mean,
        lambda1_stderr: fmt_opt(r.lambda1_stderr),
        lambda2_stderr: fmt_opt(r.lambda2_stderr),
        trials: r.trials,
        pair_coverage: r.pair_coverage,
        identities: r.identities_evaluated,
        pairs: r.pairs_evaluated,
        worst_identity: id(r.worst_identity),
        worst_sent: id(r.worst_pair.map(|p| p.sent)),
        worst_tested: id(r.worst_pair.map(|p| p.tested)),
        seed: cfg.seed,
    }
}

fn pair_selection(cfg: &IdcodeConfig, identities: u128) -> (PairCoverage, PairSelection, Vec<IdPair>) {
    if let Some(list) = &cfg.pairs {
        let pairs: Vec<IdPair> = list.iter().map(|&[s, t]| IdPair::new(s, t)).collect();
        return (PairCoverage::SampledPairs, PairSelection::Explicit(pairs.clone()), pairs);
    }
    let (coverage, pairs) = select_pairs(identities, cfg.pair_sample, cfg.seed);
    let selection = if coverage == PairCoverage::AllPairs && identities <= ALL_PAIRS_IDENTITY_LIMIT {
        PairSelection::All
    } else {
        PairSelection::Explicit(pairs.clone())
    };
    (coverage, selection, pairs)
}

/// Reports in order exact, Monte Carlo, as requested by `method`.
pub fn evaluate(cfg: &IdcodeConfig) -> CliResult<Vec<ErrorReport<f64>>> {
    let code = cfg.code.build()?;
    let ch: Dmc<f64> = cfg.channel.build()?;
    let (coverage, selection, pairs) = pair_selection(cfg, code.identity_count());
    let want_mc = match cfg.method {
        MethodChoice::MonteCarlo | MethodChoice::Both => {
            if cfg.mc_trials.is_none() {
                return Err(CliError::Config("monte carlo evaluation requires `mc_trials`".into()));
            }
            true
        }
        MethodChoice::Auto => cfg.mc_trials.is_some(),
        MethodChoice::Exact => false,
    };
    let mut reports = Vec::new();
    if cfg.method != MethodChoice::MonteCarlo {
        match ExactAnalyzer::new(&code, &ch) {
            Ok(analyzer) => reports.push(analyzer.report(&selection)?),
            Err(e @ jdai::Error::Feasibility { .. }) if cfg.method == MethodChoice::Auto && want_mc => {
                eprintln!("jdai: {e}; reporting monte carlo only");
            }
            Err(e) => return Err(e.into()),
        }
    }
    if want_mc {
        let trials = cfg.mc_trials.expect("checked above");
        reports.push(id_errors_mc_pairs(&code, &ch, trials, &pairs, coverage, cfg.seed)?);
    }
    if !cfg.entries {
        for r in &mut reports {
            r.identity_entries.clear();
            r.pair_entries.clear();
        }
    }
    Ok(reports)
}

pub fn run(common: &Common) -> CliResult<Vec<PathBuf>> {
    let mut cfg: IdcodeConfig = config::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let reports = evaluate(&cfg)?;
    let path = match common.format {
        Format::Csv => {
            let rows: Vec<ReportRow> = reports.iter().map(|r| row(&cfg, r)).collect();
            write_atomic(&common.out.join("idcode.csv"), &csv_bytes(&rows)?)?
        }
        Format::Json => {
            write_json(&common.out.join("idcode.json"), &document("idcode-eval", &cfg, json!({ "reports": reports }))?)?
        }
    };
    Ok(vec![path])
}
