//! Errors of the first and second kind: exact enumeration and Monte Carlo.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::identification::{IdentificationCode, Identity, TagCode};
use super::transmission::{decoded_law, Decision, Estimate, TransmissionCode};
use crate::channel::{Dmc, Sampler};
use crate::error::{Error, Result};
use crate::rng::{domain, rng_for};
use crate::scalar::{CompensatedSum, Scalar};

/// Largest `|R| * |Y|^n` handled by exact enumeration.
pub const EXACT_STATE_LIMIT: f64 = (1u64 << 26) as f64;

/// Largest identity count for which every ordered pair is evaluated.
pub const ALL_PAIRS_IDENTITY_LIMIT: u128 = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairCoverage {
    AllPairs,
    SampledPairs,
}

/// Ordered pair for the second kind: `sent` is transmitted, `tested`'s predicate is asked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IdPair {
    pub sent: Identity,
    pub tested: Identity,
}

impl IdPair {
    pub fn new(sent: Identity, tested: Identity) -> Self {
        Self { sent, tested }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PairSelection {
    All,
    Explicit(Vec<IdPair>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityEntry<T> {
    pub identity: Identity,
    pub lambda1: T,
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEntry<T> {
    pub pair: IdPair,
    pub lambda2: T,
    pub stderr: Option<f64>,
}

/// Worst-case and mean errors over the evaluated identities and pairs.
///
/// Per-entry lists are filled for Monte Carlo and explicit-pair exact runs; an exact
/// all-pairs run only carries the aggregates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport<T = f64> {
    pub method: Method,
    pub lambda1: T,
    pub lambda2: T,
    pub lambda1_mean: T,
    pub lambda2_mean: T,
    pub lambda1_stderr: Option<f64>,
    pub lambda2_stderr: Option<f64>,
    pub trials: Option<u64>,
    pub pair_coverage: PairCoverage,
    pub identities_evaluated: u64,
    pub pairs_evaluated: u64,
    pub worst_identity: Option<Identity>,
    pub worst_pair: Option<IdPair>,
    pub identity_entries: Vec<IdentityEntry<T>>,
    pub pair_entries: Vec<PairEntry<T>>,
}

impl<T: Scalar> ErrorReport<T> {
    pub fn to_f64(&self) -> ErrorReport<f64> {
        ErrorReport {
            method: self.method,
            lambda1: self.lambda1.to_f64_lossy(),
            lambda2: self.lambda2.to_f64_lossy(),
            lambda1_mean: self.lambda1_mean.to_f64_lossy(),
            lambda2_mean: self.lambda2_mean.to_f64_lossy(),
            lambda1_stderr: self.lambda1_stderr,
            lambda2_stderr: self.lambda2_stderr,
            trials: self.trials,
            pair_coverage: self.pair_coverage,
            identities_evaluated: self.identities_evaluated,
            pairs_evaluated: self.pairs_evaluated,
            worst_identity: self.worst_identity,
            worst_pair: self.worst_pair,
            identity_entries: self
                .identity_entries
                .iter()
                .map(|e| IdentityEntry { identity: e.identity, lambda1: e.lambda1.to_f64_lossy(), stderr: e.stderr })
                .collect(),
            pair_entries: self
                .pair_entries
                .iter()
                .map(|e| PairEntry { pair: e.pair, lambda2: e.lambda2.to_f64_lossy(), stderr: e.stderr })
                .collect(),
        }
    }

    /// `lambda1 + lambda2 < 1`, the standing requirement on identification codes.
    pub fn is_proper(&self) -> bool {
        self.lambda1.clone() + self.lambda2.clone() < T::one()
    }
}

fn check_channel<T: Scalar, I: IdentificationCode + ?Sized>(code: &I, ch: &Dmc<T>) -> Result<()> {
    if ch.inputs() < code.input_alphabet() || ch.outputs() != code.output_alphabet() {
        return Err(Error::Input(format!(
            "code needs a {}-input, {}-output channel, got {}x{}",
            code.input_alphabet(),
            code.output_alphabet(),
            ch.inputs(),
            ch.outputs()
        )));
    }
    Ok(())
}

/// Decoded law of one inner codeword, split into valid symbol pairs and rejected mass.
#[derive(Debug)]
struct PairLaw<T> {
    valid: Vec<(u64, u64, T)>,
    invalid: T,
}

/// Exact error analysis of a tag code on a channel.
///
/// Every tester decision depends on `y^n` only through the inner decoder, so the analysis
/// enumerates `W^n` once per inner codeword (skipping zero-probability branches), caches the
/// decoded law, and evaluates both error kinds from those laws.
pub struct ExactAnalyzer<'a, T, C> {
    code: &'a TagCode<C>,
    ch: &'a Dmc<T>,
    laws: Mutex<HashMap<u64, Arc<PairLaw<T>>>>,
}

impl<'a, T: Scalar, C: TransmissionCode> ExactAnalyzer<'a, T, C> {
    pub fn new(code: &'a TagCode<C>, ch: &'a Dmc<T>) -> Result<Self> {
        check_channel(code, ch)?;
        let states = code.randomness_size() as f64 * (ch.outputs() as f64).powi(code.blocklength() as i32);
        if states > EXACT_STATE_LIMIT {
            return Err(Error::Feasibility {
                what: format!(
                    "exact identification errors (q={}, k={}, n={})",
                    code.field_size(),
                    code.degree_bound(),
                    code.blocklength()
                ),
                states,
                limit: EXACT_STATE_LIMIT,
                alternative: "id_errors_mc (idcode-eval with monte_carlo)",
            });
        }
        Ok(Self { code, ch, laws: Mutex::new(HashMap::new()) })
    }

    fn compute_law(&self, message: u64) -> PairLaw<T> {
        let mut valid = Vec::new();
        let mut invalid = CompensatedSum::for_blocklength(self.code.blocklength());
        for (decision, p) in decoded_law(self.code.inner(), self.ch, message) {
            match decision {
                Decision::Message(m) => match self.code.unpack(m) {
                    Some((r, t)) => valid.push((r, t, p)),
                    None => invalid.add(p),
                },
                Decision::Erasure => invalid.add(p),
            }
        }
        PairLaw { valid, invalid: invalid.value() }
    }

    fn law(&self, message: u64) -> Arc<PairLaw<T>> {
        if let Some(law) = self.laws.lock().expect("law cache").get(&message) {
            return Arc::clone(law);
        }
        let law = Arc::new(self.compute_law(message));
        self.laws.lock().expect("law cache").insert(message, Arc::clone(&law));
        law
    }

    fn prefetch(&self, messages: &[u64]) {
        let missing: Vec<u64> = {
            let cache = self.laws.lock().expect("law cache");
            messages.iter().copied().filter(|m| !cache.contains_key(m)).collect()
        };
        let computed: Vec<(u64, PairLaw<T>)> = missing.into_par_iter().map(|m| (m, self.compute_law(m))).collect();
        let mut cache = self.laws.lock().expect("law cache");
        for (m, law) in computed {
            cache.insert(m, Arc::new(law));
        }
    }

    fn randomness(&self) -> T {
        T::from_u64(self.code.randomness_size()).expect("randomness size")
    }

    /// `sum_x Q(x|i) W^n(D_i^c | x)`.
    pub fn lambda1(&self, identity: Identity) -> Result<T> {
        self.code.check_identity(identity)?;
        let mut acc = CompensatedSum::for_blocklength(self.code.blocklength());
        for r in 0..self.code.randomness_size() {
            let law = self.law(self.code.message(identity, r));
            acc.add(law.invalid.clone());
            for (rr, t, p) in &law.valid {
                if self.code.tag(identity, *rr) != *t {
                    acc.add(p.clone());
                }
            }
        }
        Ok(acc.value() / self.randomness())
    }

    /// `sum_x Q(x|sent) W^n(D_tested | x)`.
    pub fn lambda2(&self, pair: IdPair) -> Result<T> {
        self.code.check_identity(pair.sent)?;
        self.code.check_identity(pair.tested)?;
        let mut acc = CompensatedSum::for_blocklength(self.code.blocklength());
        for r in 0..self.code.randomness_size() {
            let law = self.law(self.code.message(pair.sent, r));
            for (rr, t, p) in &law.valid {
                if self.code.tag(pair.tested, *rr) == *t {
                    acc.add(p.clone());
                }
            }
        }
        Ok(acc.value() / self.randomness())
    }

    pub fn report(&self, pairs: &PairSelection) -> Result<ErrorReport<T>> {
        match pairs {
            PairSelection::All => self.all_pairs(),
            PairSelection::Explicit(list) => self.explicit_pairs(list),
        }
    }

    fn explicit_pairs(&self, list: &[IdPair]) -> Result<ErrorReport<T>> {
        let mut identities: BTreeSet<Identity> = BTreeSet::new();
        for pair in list {
            if pair.sent == pair.tested {
                return Err(Error::Input(format!("pair ({0}, {0}) is not a second-kind pair", pair.sent)));
            }
            identities.insert(pair.sent);
            identities.insert(pair.tested);
        }
        let messages: Vec<u64> = identities
            .iter()
            .flat_map(|&i| (0..self.code.randomness_size()).map(move |r| (i, r)))
            .map(|(i, r)| self.code.message(i, r))
            .collect();
        self.prefetch(&messages);

        let identity_entries = identities
            .iter()
            .map(|&identity| Ok(IdentityEntry { identity, lambda1: self.lambda1(identity)?, stderr: None }))
            .collect::<Result<Vec<_>>>()?;
        let pair_entries = list
            .iter()
            .map(|&pair| Ok(PairEntry { pair, lambda2: self.lambda2(pair)?, stderr: None }))
            .collect::<Result<Vec<_>>>()?;
        Ok(summarize(Method::Exact, PairCoverage::SampledPairs, None, identity_entries, pair_entries))
    }

    fn all_pairs(&self) -> Result<ErrorReport<T>> {
        let n_ids = self.code.identity_count();
        if n_ids > ALL_PAIRS_IDENTITY_LIMIT {
            return Err(Error::Feasibility {
                what: format!("all-pairs evaluation of {n_ids} identities"),
                states: (n_ids as f64).powi(2),
                limit: (ALL_PAIRS_IDENTITY_LIMIT as f64).powi(2),
                alternative: "an explicit or sampled pair list",
            });
        }
        let n = n_ids as usize;
        let q = self.code.field_size() as usize;
        let blocklength = self.code.blocklength();
        let rand = self.code.randomness_size();

        let tags: Vec<u32> = (1..=n_ids)
            .flat_map(|i| (0..q as u64).map(move |r| (i, r)))
            .map(|(i, r)| self.code.tag(i, r) as u32)
            .collect();
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); q * q];
        for i in 0..n {
            for r in 0..q {
                buckets[r * q + tags[i * q + r] as usize].push(i as u32);
            }
        }
        let messages: Vec<u64> = (1..=n_ids)
            .flat_map(|i| (0..rand).map(move |r| (i, r)))
            .map(|(i, r)| self.code.message(i, r))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        self.prefetch(&messages);
        let randomness = self.randomness();

        struct Row<T> {
            lambda1: T,
            worst: Option<(T, usize)>,
            sum: T,
        }

        let rows: Vec<Row<T>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let sent = j as Identity + 1;
                let mut accepted: Vec<CompensatedSum<T>> = vec![CompensatedSum::for_blocklength(blocklength); n];
                let mut rejected = CompensatedSum::for_blocklength(blocklength);
                for r in 0..rand {
                    let law = self.law(self.code.message(sent, r));
                    rejected.add(law.invalid.clone());
                    for (rr, t, p) in &law.valid {
                        let (rr, t) = (*rr as usize, *t as usize);
                        if tags[j * q + rr] as usize != t {
                            rejected.add(p.clone());
                        }
                        for &i in &buckets[rr * q + t] {
                            accepted[i as usize].add(p.clone());
                        }
                    }
                }
                let mut worst: Option<(T, usize)> = None;
                let mut sum = CompensatedSum::new(true);
                for (i, acc) in accepted.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let v = acc.value() / randomness.clone();
                    if worst.as_ref().is_none_or(|(w, _)| v > *w) {
                        worst = Some((v.clone(), i));
                    }
                    sum.add(v);
                }
                Row { lambda1: rejected.value() / randomness.clone(), worst, sum: sum.value() }
            })
            .collect();

        let mut lambda1 = T::zero();
        let mut worst_identity = None;
        let mut lambda1_sum = CompensatedSum::new(true);
        let mut lambda2 = T::zero();
        let mut worst_pair = None;
        let mut lambda2_sum = CompensatedSum::new(true);
        for (j, row) in rows.into_iter().enumerate() {
            if worst_identity.is_none() || row.lambda1 > lambda1 {
                lambda1 = row.lambda1.clone();
                worst_identity = Some(j as Identity + 1);
            }
            lambda1_sum.add(row.lambda1);
            if let Some((v, i)) = row.worst {
                if worst_pair.is_none() || v > lambda2 {
                    lambda2 = v;
                    worst_pair = Some(IdPair::new(j as Identity + 1, i as Identity + 1));
                }
            }
            lambda2_sum.add(row.sum);
        }
        let pairs = (n * n.saturating_sub(1)) as u64;
        let lambda2_mean =
            if pairs == 0 { T::zero() } else { lambda2_sum.value() / T::from_u64(pairs).expect("pair count") };
        Ok(ErrorReport {
            method: Method::Exact,
            lambda1,
            lambda2,
            lambda1_mean: lambda1_sum.value() / T::from_usize(n).expect("identity count"),
            lambda2_mean,
            lambda1_stderr: None,
            lambda2_stderr: None,
            trials: None,
            pair_coverage: PairCoverage::AllPairs,
            identities_evaluated: n as u64,
            pairs_evaluated: pairs,
            worst_identity,
            worst_pair,
            identity_entries: Vec::new(),
            pair_entries: Vec::new(),
        })
    }
}

fn summarize<T: Scalar>(
    method: Method,
    pair_coverage: PairCoverage,
    trials: Option<u64>,
    identity_entries: Vec<IdentityEntry<T>>,
    pair_entries: Vec<PairEntry<T>>,
) -> ErrorReport<T> {
    let worst_id = identity_entries.iter().fold(None::<&IdentityEntry<T>>, |best, e| match best {
        Some(b) if b.lambda1 >= e.lambda1 => Some(b),
        _ => Some(e),
    });
    let worst_pair = pair_entries.iter().fold(None::<&PairEntry<T>>, |best, e| match best {
        Some(b) if b.lambda2 >= e.lambda2 => Some(b),
        _ => Some(e),
    });
    let mean = |values: Vec<T>| {
        let count = values.len();
        if count == 0 {
            return T::zero();
        }
        let mut acc = CompensatedSum::new(true);
        values.into_iter().for_each(|v| acc.add(v));
        acc.value() / T::from_usize(count).expect("count")
    };
    ErrorReport {
        method,
        lambda1: worst_id.map_or_else(T::zero, |e| e.lambda1.clone()),
        lambda2: worst_pair.map_or_else(T::zero, |e| e.lambda2.clone()),
        lambda1_mean: mean(identity_entries.iter().map(|e| e.lambda1.clone()).collect()),
        lambda2_mean: mean(pair_entries.iter().map(|e| e.lambda2.clone()).collect()),
        lambda1_stderr: worst_id.and_then(|e| e.stderr),
        lambda2_stderr: worst_pair.and_then(|e| e.stderr),
        trials,
        pair_coverage,
        identities_evaluated: identity_entries.len() as u64,
        pairs_evaluated: pair_entries.len() as u64,
        worst_identity: worst_id.map(|e| e.identity),
        worst_pair: worst_pair.map(|e| e.pair),
        identity_entries,
        pair_entries,
    }
}

/// Exact errors of both kinds for a tag code. See [`ExactAnalyzer`].
pub fn id_errors_exact<T: Scalar, C: TransmissionCode>(
    code: &TagCode<C>,
    ch: &Dmc<T>,
    pairs: &PairSelection,
) -> Result<ErrorReport<T>> {
    ExactAnalyzer::new(code, ch)?.report(pairs)
}

/// Seeded sample of distinct ordered pairs, or every pair when `pair_sample` covers them.
pub fn select_pairs(identity_count: u128, pair_sample: u64, rng_seed: u64) -> (PairCoverage, Vec<IdPair>) {
    let total = identity_count.saturating_mul(identity_count.saturating_sub(1));
    if identity_count <= ALL_PAIRS_IDENTITY_LIMIT && total <= u128::from(pair_sample) {
        let all = (1..=identity_count)
            .flat_map(|s| (1..=identity_count).filter(move |&t| t != s).map(move |t| IdPair::new(s, t)))
            .collect();
        return (PairCoverage::AllPairs, all);
    }
    let mut rng = rng_for(rng_seed, &[domain::PAIR_SAMPLE]);
    let mut chosen = BTreeSet::new();
    let mut order = Vec::new();
    while (order.len() as u64) < pair_sample {
        let sent = rng.random_range(1..=identity_count);
        let tested = rng.random_range(1..=identity_count);
        if sent != tested && chosen.insert((sent, tested)) {
            order.push(IdPair::new(sent, tested));
        }
    }
    (PairCoverage::SampledPairs, order)
}

fn split(identity: Identity) -> [u64; 2] {
    [(identity >> 64) as u64, identity as u64]
}

/// Codewords for every randomness value, when the space is small enough to cache.
fn codewords<I: IdentificationCode + ?Sized>(code: &I, identity: Identity) -> Option<Vec<Vec<usize>>> {
    (code.randomness_size() <= 4096).then(|| (0..code.randomness_size()).map(|r| code.encode(identity, r)).collect())
}

fn trial_codeword<'c, I: IdentificationCode + ?Sized, R: Rng>(
    code: &I,
    identity: Identity,
    cache: &'c Option<Vec<Vec<usize>>>,
    scratch: &'c mut Vec<usize>,
    rng: &mut R,
) -> &'c [usize] {
    let r = rng.random_range(0..code.randomness_size());
    match cache {
        Some(words) => &words[r as usize],
        None => {
            *scratch = code.encode(identity, r);
            scratch
        }
    }
}

/// Monte Carlo estimates of both error kinds, deterministic in `rng_seed`.
///
/// The second kind is estimated on `pair_sample` ordered pairs (all pairs when that covers
/// them); the first kind on every identity appearing in those pairs.
pub fn id_errors_mc<T: Scalar, I: IdentificationCode + ?Sized>(
    code: &I,
    ch: &Dmc<T>,
    trials: u64,
    pair_sample: u64,
    rng_seed: u64,
) -> Result<ErrorReport<f64>> {
    check_channel(code, ch)?;
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let (coverage, pairs) = select_pairs(code.identity_count(), pair_sample, rng_seed);
    id_errors_mc_pairs(code, ch, trials, &pairs, coverage, rng_seed)
}

/// Monte Carlo over a given pair list.
pub fn id_errors_mc_pairs<T: Scalar, I: IdentificationCode + ?Sized>(
    code: &I,
    ch: &Dmc<T>,
    trials: u64,
    pairs: &[IdPair],
    coverage: PairCoverage,
    rng_seed: u64,
) -> Result<ErrorReport<f64>> {
    check_channel(code, ch)?;
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    for pair in pairs {
        code.check_identity(pair.sent)?;
        code.check_identity(pair.tested)?;
    }
    let sampler = Sampler::new(ch);
    let mut identities: Vec<Identity> =
        pairs.iter().flat_map(|p| [p.sent, p.tested]).collect::<BTreeSet<_>>().into_iter().collect();
    if identities.is_empty() && code.identity_count() >= 1 {
        identities.push(1);
    }

    let identity_entries: Vec<IdentityEntry<f64>> = identities
        .par_iter()
        .map(|&identity| {
            let [hi, lo] = split(identity);
            let mut rng = rng_for(rng_seed, &[domain::TRIALS, 1, hi, lo]);
            let cache = codewords(code, identity);
            let (mut scratch, mut y) = (Vec::new(), Vec::new());
            let mut rejected = 0;
            for _ in 0..trials {
                let x = trial_codeword(code, identity, &cache, &mut scratch, &mut rng);
                sampler.sample_into(x, &mut rng, &mut y);
                if !code.accepts(identity, &y) {
                    rejected += 1;
                }
            }
            let est = Estimate::from_counts(rejected, trials);
            IdentityEntry { identity, lambda1: est.value, stderr: Some(est.stderr) }
        })
        .collect();

    let pair_entries: Vec<PairEntry<f64>> = pairs
        .par_iter()
        .map(|&pair| {
            let [sh, sl] = split(pair.sent);
            let [th, tl] = split(pair.tested);
            let mut rng = rng_for(rng_seed, &[domain::TRIALS, 2, sh, sl, th, tl]);
            let cache = codewords(code, pair.sent);
            let (mut scratch, mut y) = (Vec::new(), Vec::new());
            let mut accepted = 0;
            for _ in 0..trials {
                let x = trial_codeword(code, pair.sent, &cache, &mut scratch, &mut rng);
                sampler.sample_into(x, &mut rng, &mut y);
                if code.accepts(pair.tested, &y) {
                    accepted += 1;
                }
            }
            let est = Estimate::from_counts(accepted, trials);
            PairEntry { pair, lambda2: est.value, stderr: Some(est.stderr) }
        })
        .collect();

    Ok(summarize(Method::MonteCarlo, coverage, Some(trials), identity_entries, pair_entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_bsc, BscParams};
    use crate::coding::{deterministic_variant, make_tag_code, TagCodeParams};
    use crate::scalar::Rational;

    fn code(q: u64, k: usize, reps: usize) -> TagCode {
        make_tag_code(TagCodeParams::with_repetition(q, k, reps).unwrap()).unwrap()
    }

    fn noiseless() -> Dmc<f64> {
        Dmc::identity(2).unwrap()
    }

    #[test]
    fn noiseless_q5_k2_all_pairs() {
        let report = id_errors_exact(&code(5, 2, 1), &noiseless(), &PairSelection::All).unwrap();
        assert_eq!(report.lambda1, 0.0);
        assert_eq!(report.lambda2, 1.0 / 5.0);
        assert_eq!(report.pairs_evaluated, 600);
        assert_eq!(report.pair_coverage, PairCoverage::AllPairs);
        // Distinct lines through Z_5 meet in at most one point; parallel lines never.
        let with_shared_point = 25 * 20;
        assert!((report.lambda2_mean - with_shared_point as f64 * 0.2 / 600.0).abs() < 1e-12);
    }

    #[test]
    fn exact_in_rationals() {
        let ch = Dmc::<Rational>::identity(2).unwrap();
        let report = id_errors_exact(&code(7, 3, 1), &ch, &PairSelection::All).unwrap();
        assert_eq!(report.lambda2, Rational::ratio(2, 7));
        assert_eq!(report.lambda1, Rational::ratio(0, 1));
    }

    #[test]
    fn constant_polynomials_never_collide() {
        let report = id_errors_exact(&code(5, 1, 1), &noiseless(), &PairSelection::All).unwrap();
        assert_eq!(report.lambda2, 0.0);
    }

    #[test]
    fn fixed_point_variant_collides() {
        let c = deterministic_variant(&code(5, 2, 1), 0).unwrap();
        let report = id_errors_exact(&c, &noiseless(), &PairSelection::All).unwrap();
        assert_eq!(report.lambda2, 1.0);
        let pair = report.worst_pair.unwrap();
        assert_eq!(c.coefficients(pair.sent)[0], c.coefficients(pair.tested)[0]);
    }

    #[test]
    fn explicit_pairs_match_all_pairs() {
        let c = code(5, 2, 3);
        let ch = make_bsc(&BscParams::new(0.05).unwrap());
        let all: ErrorReport = id_errors_exact(&c, &ch, &PairSelection::All).unwrap();
        let (_, list) = select_pairs(25, 600, 0);
        let explicit = id_errors_exact(&c, &ch, &PairSelection::Explicit(list)).unwrap();
        assert!((all.lambda1 - explicit.lambda1).abs() < 1e-15);
        assert!((all.lambda2 - explicit.lambda2).abs() < 1e-15);
        assert!((all.lambda2_mean - explicit.lambda2_mean).abs() < 1e-12);
    }

    #[test]
    fn guard_names_monte_carlo() {
        let c = code(11, 2, 3);
        let err = id_errors_exact(&c, &make_bsc(&BscParams::new(0.1).unwrap()), &PairSelection::All).unwrap_err();
        match err {
            Error::Feasibility { alternative, .. } => assert!(alternative.contains("id_errors_mc")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let c = code(5, 2, 3);
        let ch = make_bsc(&BscParams::new(0.1).unwrap());
        let a = id_errors_mc(&c, &ch, 2000, 10, 11).unwrap();
        let b = id_errors_mc(&c, &ch, 2000, 10, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pair_coverage, PairCoverage::SampledPairs);
        assert_eq!(a.pairs_evaluated, 10);
        assert!(id_errors_mc(&c, &ch, 0, 10, 11).is_err());
    }

    #[test]
    fn monte_carlo_zero_on_noiseless_first_kind() {
        let c = code(5, 2, 1);
        let report = id_errors_mc(&c, &noiseless(), 100_000, 4, 1).unwrap();
        assert_eq!(report.lambda1, 0.0);
    }

    #[test]
    fn pair_sampling_covers_small_spaces() {
        let (coverage, pairs) = select_pairs(3, 100, 0);
        assert_eq!(coverage, PairCoverage::AllPairs);
        assert_eq!(pairs.len(), 6);
        let (coverage, pairs) = select_pairs(251u128.pow(8), 50, 5);
        assert_eq!(coverage, PairCoverage::SampledPairs);
        assert_eq!(pairs.len(), 50);
        assert_eq!(pairs, select_pairs(251u128.pow(8), 50, 5).1);
    }
}
