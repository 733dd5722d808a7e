use std::collections::BTreeMap;
use std::fmt::Debug;

use crate::channel::{Dmc, Sampler};
use crate::error::{Error, Result};
use crate::rng::{domain, rng_for};
use crate::scalar::{CompensatedSum, Scalar};

/// Outcome of a transmission decoder. Decoders are total functions of `y^n`, so the
/// decoding sets they induce are disjoint by construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Decision {
    Message(u64),
    Erasure,
}

/// A deterministic block code with messages `0..message_count()`.
pub trait TransmissionCode: Debug + Send + Sync {
    fn blocklength(&self) -> usize;
    fn message_count(&self) -> u64;
    fn input_alphabet(&self) -> usize;
    fn output_alphabet(&self) -> usize;
    /// Codeword `u_m`; `message` must be below `message_count()`.
    fn encode(&self, message: u64) -> Vec<usize>;
    fn decode(&self, y: &[usize]) -> Decision;

    fn check_channel<T: Scalar>(&self, ch: &Dmc<T>) -> Result<()>
    where
        Self: Sized,
    {
        if ch.inputs() < self.input_alphabet() || ch.outputs() != self.output_alphabet() {
            return Err(Error::Input(format!(
                "code needs a {}-input, {}-output channel, got {}x{}",
                self.input_alphabet(),
                self.output_alphabet(),
                ch.inputs(),
                ch.outputs()
            )));
        }
        Ok(())
    }
}

/// Binary repetition code: each message bit is sent `reps` times, decoded by majority.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepetitionCode {
    bits: usize,
    reps: usize,
}

pub fn make_repetition_code(bits: usize, reps: usize) -> Result<RepetitionCode> {
    if reps == 0 || reps.is_multiple_of(2) {
        return Err(Error::Parameter(format!("repetition factor must be odd and positive, got {reps}")));
    }
    if bits == 0 || bits > 62 {
        return Err(Error::Parameter(format!("repetition code carries 1..=62 bits, got {bits}")));
    }
    Ok(RepetitionCode { bits, reps })
}

impl RepetitionCode {
    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn reps(&self) -> usize {
        self.reps
    }
}

impl TransmissionCode for RepetitionCode {
    fn blocklength(&self) -> usize {
        self.bits * self.reps
    }

    fn message_count(&self) -> u64 {
        1u64 << self.bits
    }

    fn input_alphabet(&self) -> usize {
        2
    }

    fn output_alphabet(&self) -> usize {
        2
    }

    fn encode(&self, message: u64) -> Vec<usize> {
        debug_assert!(message < self.message_count());
        let mut out = Vec::with_capacity(self.blocklength());
        for b in (0..self.bits).rev() {
            let bit = ((message >> b) & 1) as usize;
            out.extend(std::iter::repeat_n(bit, self.reps));
        }
        out
    }

    fn decode(&self, y: &[usize]) -> Decision {
        debug_assert_eq!(y.len(), self.blocklength());
        let message = y.chunks(self.reps).fold(0u64, |acc, chunk| {
            let ones = chunk.iter().filter(|&&s| s != 0).count();
            (acc << 1) | u64::from(2 * ones > self.reps)
        });
        Decision::Message(message)
    }
}

/// Largest `n * log2 |Y|` for exact transmission-error enumeration.
pub const TRANSMISSION_ENUMERATION_BITS: f64 = 24.0;

/// Visits every `y^n` with nonzero probability under `W^n(.|x)`, in lexicographic order.
pub fn for_each_output<T: Scalar, F: FnMut(&[usize], T)>(ch: &Dmc<T>, x: &[usize], mut visit: F) {
    fn recurse<T: Scalar, F: FnMut(&[usize], T)>(
        ch: &Dmc<T>,
        x: &[usize],
        prefix: &mut Vec<usize>,
        prob: T,
        visit: &mut F,
    ) {
        let pos = prefix.len();
        if pos == x.len() {
            visit(prefix, prob);
            return;
        }
        for y in 0..ch.outputs() {
            let w = ch.prob(x[pos], y);
            if w.is_zero() {
                continue;
            }
            prefix.push(y);
            recurse(ch, x, prefix, prob.clone() * w.clone(), visit);
            prefix.pop();
        }
    }
    let mut prefix = Vec::with_capacity(x.len());
    recurse(ch, x, &mut prefix, T::one(), &mut visit);
}

/// Exact law of the decoder output when `message` is sent: sorted `(decision, probability)`.
pub fn decoded_law<T: Scalar, C: TransmissionCode>(code: &C, ch: &Dmc<T>, message: u64) -> Vec<(Decision, T)> {
    let n = code.blocklength();
    let mut sums: BTreeMap<Decision, CompensatedSum<T>> = BTreeMap::new();
    for_each_output(ch, &code.encode(message), |y, p| {
        sums.entry(code.decode(y)).or_insert_with(|| CompensatedSum::for_blocklength(n)).add(p);
    });
    sums.into_iter().map(|(d, s)| (d, s.value())).collect()
}

/// Exact `W^n(D_m^c | u_m)` by enumerating every output sequence.
pub fn transmission_error<T: Scalar, C: TransmissionCode>(code: &C, ch: &Dmc<T>, message: u64) -> Result<T> {
    code.check_channel(ch)?;
    if message >= code.message_count() {
        return Err(Error::Input(format!("message {message} outside 0..{}", code.message_count())));
    }
    let cost = code.blocklength() as f64 * (ch.outputs() as f64).log2();
    if cost > TRANSMISSION_ENUMERATION_BITS {
        return Err(Error::Feasibility {
            what: format!("transmission error at blocklength {}", code.blocklength()),
            states: cost.exp2(),
            limit: TRANSMISSION_ENUMERATION_BITS.exp2(),
            alternative: "transmission_error_mc",
        });
    }
    let n = code.blocklength();
    let mut err = CompensatedSum::for_blocklength(n);
    for (decision, p) in decoded_law(code, ch, message) {
        if decision != Decision::Message(message) {
            err.add(p);
        }
    }
    Ok(err.value())
}

/// Bernoulli frequency with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl Estimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let value = hits as f64 / trials as f64;
        Self { value, stderr: (value * (1.0 - value) / trials as f64).sqrt(), trials }
    }
}

/// Monte Carlo counterpart of [`transmission_error`].
pub fn transmission_error_mc<T: Scalar, C: TransmissionCode>(
    code: &C,
    ch: &Dmc<T>,
    message: u64,
    trials: u64,
    rng_seed: u64,
) -> Result<Estimate> {
    code.check_channel(ch)?;
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    if message >= code.message_count() {
        return Err(Error::Input(format!("message {message} outside 0..{}", code.message_count())));
    }
    let sampler = Sampler::new(ch);
    let x = code.encode(message);
    let mut rng = rng_for(rng_seed, &[domain::TRIALS, message]);
    let mut y = Vec::with_capacity(x.len());
    let mut errors = 0;
    for _ in 0..trials {
        sampler.sample_into(&x, &mut rng, &mut y);
        if code.decode(&y) != Decision::Message(message) {
            errors += 1;
        }
    }
    Ok(Estimate::from_counts(errors, trials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_bsc, BscParams};
    use crate::scalar::Rational;

    fn bsc(p: f64) -> Dmc<f64> {
        make_bsc(&BscParams::new(p).unwrap())
    }

    #[test]
    fn repetition_shapes() {
        let c = make_repetition_code(1, 1).unwrap();
        assert_eq!((c.blocklength(), c.message_count()), (1, 2));
        assert_eq!(c.encode(1), vec![1]);
        let c = make_repetition_code(2, 3).unwrap();
        assert_eq!((c.blocklength(), c.message_count()), (6, 4));
        assert_eq!(c.encode(2), vec![1, 1, 1, 0, 0, 0]);
        assert_eq!(c.decode(&[1, 0, 1, 0, 0, 1]), Decision::Message(2));
        assert!(make_repetition_code(1, 2).is_err());
        assert!(make_repetition_code(1, 0).is_err());
    }

    #[test]
    fn repetition_error_matches_binomial_tail() {
        let c = make_repetition_code(1, 3).unwrap();
        let e = transmission_error(&c, &bsc(0.1), 0).unwrap();
        assert!((e - 0.028).abs() < 1e-15);
        let exact = make_bsc(&BscParams::new(Rational::ratio(1, 10)).unwrap());
        assert_eq!(transmission_error(&c, &exact, 1).unwrap(), Rational::ratio(28, 1000));
    }

    #[test]
    fn trivial_error_cases() {
        let c = make_repetition_code(3, 1).unwrap();
        for m in 0..8 {
            assert_eq!(transmission_error(&c, &bsc(0.0), m).unwrap(), 0.0);
        }
        let c = make_repetition_code(1, 1).unwrap();
        assert_eq!(transmission_error(&c, &bsc(0.5), 0).unwrap(), 0.5);
        assert!(transmission_error(&c, &bsc(0.5), 2).is_err());
    }

    #[test]
    fn enumeration_guard() {
        let c = make_repetition_code(5, 5).unwrap();
        assert!(matches!(transmission_error(&c, &bsc(0.1), 0), Err(Error::Feasibility { .. })));
        let est = transmission_error_mc(&c, &bsc(0.1), 0, 1000, 3).unwrap();
        assert!(est.value < 0.05);
    }

    #[test]
    fn mismatched_channel_is_rejected() {
        let c = make_repetition_code(1, 3).unwrap();
        let ternary = Dmc::<f64>::identity(3).unwrap();
        assert!(matches!(transmission_error(&c, &ternary, 0), Err(Error::Input(_))));
    }
}
