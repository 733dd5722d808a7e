//! Identity-count scaling of the tag code against explicit addressing.

use serde::{Deserialize, Serialize};

use crate::channel::Dmc;
use crate::coding::field::{checked_pow, is_prime, symbol_width};
use crate::coding::{
    id_errors_mc_pairs, make_tag_code, select_pairs, ExactAnalyzer, IdentificationCode, Method, PairCoverage,
    PairSelection, TagCode, TagCodeParams, ALL_PAIRS_IDENTITY_LIMIT, EXACT_STATE_LIMIT,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalingTarget {
    /// Pick the field and degree for a payload of this many bits (before inner coding).
    PayloadBits(usize),
    Field {
        q: u64,
        k: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRequest {
    pub targets: Vec<ScalingTarget>,
    pub channel: Dmc<f64>,
    /// Bound on `lambda1 + lambda2`.
    pub error_budget: f64,
    pub population: u64,
    pub max_reps: usize,
    pub mc_trials: u64,
    pub pair_sample: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub payload_bits: usize,
    pub q: u64,
    pub k: usize,
    pub inner_reps: Option<usize>,
    pub blocklength: Option<usize>,
    pub log2_identities: f64,
    pub log2_log2_identities: f64,
    pub baseline_bits: u32,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub method: Option<Method>,
    pub pair_coverage: Option<PairCoverage>,
    pub pairs_evaluated: u64,
    pub feasible: bool,
    pub note: String,
}

/// `ceil(log2 population)`: bits needed to address one device explicitly.
pub fn addressing_bits(population: u64) -> u32 {
    if population <= 1 {
        0
    } else {
        64 - (population - 1).leading_zeros()
    }
}

/// Largest prime whose binary width is exactly `width` bits.
pub fn largest_prime_of_width(width: usize) -> Option<u64> {
    if width == 0 || width > 31 {
        return None;
    }
    let hi = 1u64 << width;
    let lo = if width == 1 { 2 } else { (1u64 << (width - 1)) + 1 };
    (lo..=hi).rev().find(|&q| is_prime(q))
}

fn max_degree(q: u64, budget: f64) -> usize {
    let by_budget = (budget / 2.0 * q as f64).floor() as usize + 1;
    let mut k = by_budget.min(q as usize).max(1);
    while k > 1 && checked_pow(q, k).is_none() {
        k -= 1;
    }
    k
}

struct Evaluation {
    lambda1: f64,
    lambda2: f64,
    method: Method,
    coverage: PairCoverage,
    pairs: u64,
}

fn evaluate(code: &TagCode, req: &ScalingRequest) -> Result<Evaluation> {
    let n_ids = code.identity_count();
    let branching =
        req.channel.rows().iter().map(|row| row.iter().filter(|&&w| w > 0.0).count()).max().unwrap_or(1) as f64;
    let leaves = branching.powi(code.blocklength() as i32);
    let all_pairs =
        n_ids <= ALL_PAIRS_IDENTITY_LIMIT && n_ids.saturating_mul(n_ids) <= u128::from(req.pair_sample.max(1));
    let (coverage, pairs) = select_pairs(n_ids, req.pair_sample, req.seed);
    let involved = if all_pairs { n_ids as f64 } else { (2 * pairs.len()) as f64 };
    let messages = (involved * code.randomness_size() as f64).min((code.field_size() as f64).powi(2));

    if messages * leaves <= EXACT_STATE_LIMIT {
        if let Ok(analyzer) = ExactAnalyzer::new(code, &req.channel) {
            let selection = if all_pairs { PairSelection::All } else { PairSelection::Explicit(pairs.clone()) };
            let report = analyzer.report(&selection)?;
            return Ok(Evaluation {
                lambda1: report.lambda1,
                lambda2: report.lambda2,
                method: Method::Exact,
                coverage: report.pair_coverage,
                pairs: report.pairs_evaluated,
            });
        }
    }
    let report = id_errors_mc_pairs(code, &req.channel, req.mc_trials, &pairs, coverage, req.seed)?;
    Ok(Evaluation {
        lambda1: report.lambda1,
        lambda2: report.lambda2,
        method: Method::MonteCarlo,
        coverage: report.pair_coverage,
        pairs: report.pairs_evaluated,
    })
}

fn resolve(target: ScalingTarget, budget: f64) -> std::result::Result<(u64, usize), String> {
    match target {
        ScalingTarget::Field { q, k } => Ok((q, k)),
        ScalingTarget::PayloadBits(bits) => {
            if bits < 2 || bits % 2 != 0 {
                return Err(format!("payload of {bits} bits is not an even symbol pair"));
            }
            let q = largest_prime_of_width(bits / 2).ok_or_else(|| format!("no prime field fits {bits} bits"))?;
            Ok((q, max_degree(q, budget)))
        }
    }
}

fn row_for(target: ScalingTarget, req: &ScalingRequest) -> Result<ScalingRow> {
    let baseline_bits = addressing_bits(req.population);
    let (q, k) = match resolve(target, req.error_budget) {
        Ok(qk) => qk,
        Err(note) => {
            let payload_bits = match target {
                ScalingTarget::PayloadBits(b) => b,
                ScalingTarget::Field { .. } => 0,
            };
            return Ok(ScalingRow {
                payload_bits,
                q: 0,
                k: 0,
                inner_reps: None,
                blocklength: None,
                log2_identities: f64::NAN,
                log2_log2_identities: f64::NAN,
                baseline_bits,
                lambda1: None,
                lambda2: None,
                method: None,
                pair_coverage: None,
                pairs_evaluated: 0,
                feasible: false,
                note,
            });
        }
    };
    let log2_identities = k as f64 * (q as f64).log2();
    let mut row = ScalingRow {
        payload_bits: 2 * symbol_width(q.max(2)),
        q,
        k,
        inner_reps: None,
        blocklength: None,
        log2_identities,
        log2_log2_identities: log2_identities.log2(),
        baseline_bits,
        lambda1: None,
        lambda2: None,
        method: None,
        pair_coverage: None,
        pairs_evaluated: 0,
        feasible: false,
        note: String::new(),
    };
    for reps in (1..=req.max_reps).step_by(2) {
        let params = TagCodeParams::with_repetition(q, k, reps)?;
        let code = match make_tag_code(params) {
            Ok(c) => c,
            Err(e) => {
                row.note = e.to_string();
                return Ok(row);
            }
        };
        let eval = evaluate(&code, req)?;
        row.inner_reps = Some(reps);
        row.blocklength = Some(code.blocklength());
        row.lambda1 = Some(eval.lambda1);
        row.lambda2 = Some(eval.lambda2);
        row.method = Some(eval.method);
        row.pair_coverage = Some(eval.coverage);
        row.pairs_evaluated = eval.pairs;
        if eval.lambda1 + eval.lambda2 <= req.error_budget {
            row.feasible = true;
            return Ok(row);
        }
    }
    row.note = format!("lambda1 + lambda2 exceeds {} up to {} repetitions", req.error_budget, req.max_reps);
    Ok(row)
}

/// One row per target: chosen parameters, achieved errors, identity counts in bits, and the
/// explicit-addressing baseline. Rows that cannot meet the budget are kept and marked.
pub fn scaling_report(req: &ScalingRequest) -> Result<Vec<ScalingRow>> {
    if !(req.error_budget > 0.0 && req.error_budget < 1.0) {
        return Err(Error::Parameter(format!("error budget {} outside (0, 1)", req.error_budget)));
    }
    if req.max_reps == 0 {
        return Err(Error::Parameter("max_reps must be at least 1".into()));
    }
    req.targets.iter().map(|&t| row_for(t, req)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(targets: Vec<ScalingTarget>) -> ScalingRequest {
        ScalingRequest {
            targets,
            channel: Dmc::identity(2).unwrap(),
            error_budget: 0.5,
            population: 100_000,
            max_reps: 3,
            mc_trials: 1000,
            pair_sample: 32,
            seed: 1,
        }
    }

    #[test]
    fn addressing_baseline() {
        assert_eq!(addressing_bits(100_000), 17);
        assert_eq!(addressing_bits(1 << 17), 17);
        assert_eq!(addressing_bits((1 << 17) + 1), 18);
        assert_eq!(addressing_bits(1), 0);
    }

    #[test]
    fn prime_widths() {
        assert_eq!(largest_prime_of_width(1), Some(2));
        assert_eq!(largest_prime_of_width(3), Some(7));
        assert_eq!(largest_prime_of_width(8), Some(251));
        assert_eq!(largest_prime_of_width(16), Some(65521));
    }

    #[test]
    fn noiseless_rows() {
        let rows =
            scaling_report(&request(vec![ScalingTarget::Field { q: 5, k: 2 }, ScalingTarget::Field { q: 251, k: 8 }]))
                .unwrap();
        assert!(rows.iter().all(|r| r.feasible && r.inner_reps == Some(1)));
        assert_eq!(rows[0].lambda2, Some(0.2));
        assert_eq!(rows[0].method, Some(Method::Exact));
        assert_eq!(rows[1].payload_bits, 16);
        assert!((rows[1].log2_identities - 63.772).abs() < 1e-3);
        assert!(rows[1].lambda2.unwrap() <= 7.0 / 251.0);
    }

    #[test]
    fn payload_targets_choose_fields() {
        let rows =
            scaling_report(&request(vec![ScalingTarget::PayloadBits(8), ScalingTarget::PayloadBits(7)])).unwrap();
        assert_eq!(rows[0].q, 13);
        assert!(rows[0].feasible);
        assert!(!rows[1].feasible);
    }

    #[test]
    fn infeasible_budget_is_marked() {
        let mut req = request(vec![ScalingTarget::Field { q: 5, k: 2 }]);
        req.error_budget = 0.1;
        let rows = scaling_report(&req).unwrap();
        assert!(!rows[0].feasible);
        assert!(!rows[0].note.is_empty());
    }
}
