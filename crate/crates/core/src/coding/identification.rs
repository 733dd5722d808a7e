use serde::{Deserialize, Serialize};

use super::field::{checked_pow, digits, eval_poly, is_prime, symbol_width};
use super::transmission::{make_repetition_code, Decision, RepetitionCode, TransmissionCode};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Identity index, `1..=N`.
pub type Identity = u128;

/// A randomized identification code.
///
/// Identity `i` is sent as `encode(i, r)` with `r` uniform on `0..randomness_size()`, which
/// realizes the input law `Q(.|i)`. Each identity owns an acceptance predicate; unlike
/// transmission decoding sets these may overlap.
pub trait IdentificationCode: Sync {
    fn blocklength(&self) -> usize;
    fn input_alphabet(&self) -> usize;
    fn output_alphabet(&self) -> usize;
    fn identity_count(&self) -> u128;
    fn randomness_size(&self) -> u64;
    fn encode(&self, identity: Identity, r: u64) -> Vec<usize>;
    fn accepts(&self, identity: Identity, y: &[usize]) -> bool;

    fn check_identity(&self, identity: Identity) -> Result<()> {
        if identity == 0 || identity > self.identity_count() {
            return Err(Error::Input(format!("identity {identity} outside 1..={}", self.identity_count())));
        }
        Ok(())
    }
}

/// Parameters of the polynomial tag code over `Z_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct TagCodeParams<C = RepetitionCode> {
    pub field_size: u64,
    pub degree_bound: usize,
    pub inner_code: C,
}

impl TagCodeParams<RepetitionCode> {
    /// Tag code whose symbol pair is protected by an odd repetition code.
    pub fn with_repetition(field_size: u64, degree_bound: usize, reps: usize) -> Result<Self> {
        if field_size < 2 {
            return Err(Error::Parameter(format!("field size {field_size} is not prime")));
        }
        let inner_code = make_repetition_code(2 * symbol_width(field_size), reps)?;
        Ok(Self { field_size, degree_bound, inner_code })
    }
}

/// Serializable summary of a tag code's parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagCodeSpec {
    pub q: u64,
    pub k: usize,
    #[serde(default = "default_reps")]
    pub inner_reps: usize,
    #[serde(default)]
    pub fixed_r: Option<u64>,
}

fn default_reps() -> usize {
    1
}

impl TagCodeSpec {
    pub fn build(&self) -> Result<TagCode> {
        let code = make_tag_code(TagCodeParams::with_repetition(self.q, self.k, self.inner_reps)?)?;
        match self.fixed_r {
            Some(r) => deterministic_variant(&code, r),
            None => Ok(code),
        }
    }
}

/// Identity `i` is the polynomial `T_i` whose coefficients are the base-`q` digits of `i - 1`
/// (constant term first). A transmission is the pair `(r, T_i(r))` for an evaluation point `r`,
/// packed big-endian into `2 * ceil(log2 q)` bits and sent through the inner code.
#[derive(Clone, Debug, PartialEq)]
pub struct TagCode<C = RepetitionCode> {
    q: u64,
    k: usize,
    width: usize,
    identity_count: u128,
    inner: C,
    fixed_r: Option<u64>,
}

pub fn make_tag_code<C: TransmissionCode>(params: TagCodeParams<C>) -> Result<TagCode<C>> {
    let TagCodeParams { field_size: q, degree_bound: k, inner_code } = params;
    if !is_prime(q) {
        return Err(Error::Parameter(format!("field size {q} is not prime")));
    }
    if q >= 1 << 31 {
        return Err(Error::Parameter(format!("field size {q} exceeds 2^31")));
    }
    if k == 0 || k as u64 > q {
        return Err(Error::Parameter(format!("degree bound {k} outside 1..={q}")));
    }
    let identity_count = checked_pow(q, k)
        .ok_or_else(|| Error::Parameter(format!("identity count {q}^{k} does not fit in 128 bits")))?;
    let width = symbol_width(q);
    let needed = 1u64 << (2 * width);
    if inner_code.message_count() != needed {
        return Err(Error::Parameter(format!(
            "inner code carries {} messages, tag pairs need {needed}",
            inner_code.message_count()
        )));
    }
    Ok(TagCode { q, k, width, identity_count, inner: inner_code, fixed_r: None })
}

/// The same code with the encoder randomness pinned to `fixed_r` (degenerate `Q`).
pub fn deterministic_variant<C: TransmissionCode + Clone>(code: &TagCode<C>, fixed_r: u64) -> Result<TagCode<C>> {
    if fixed_r >= code.q {
        return Err(Error::Parameter(format!("fixed evaluation point {fixed_r} outside 0..{}", code.q)));
    }
    Ok(TagCode { fixed_r: Some(fixed_r), ..code.clone() })
}

/// `(k - 1) / q`: distinct polynomials of degree below `k` agree on at most `k - 1` points.
pub fn second_kind_bound<T: Scalar, C>(params: &TagCodeParams<C>) -> T {
    T::ratio(params.degree_bound.saturating_sub(1) as u64, params.field_size)
}

impl<C: TransmissionCode> TagCode<C> {
    pub fn field_size(&self) -> u64 {
        self.q
    }

    pub fn degree_bound(&self) -> usize {
        self.k
    }

    pub fn inner(&self) -> &C {
        &self.inner
    }

    pub fn fixed_r(&self) -> Option<u64> {
        self.fixed_r
    }

    /// Bits carried per transmission before inner coding: `2 * ceil(log2 q)`.
    pub fn payload_bits(&self) -> usize {
        2 * self.width
    }

    pub fn log2_identity_count(&self) -> f64 {
        self.k as f64 * (self.q as f64).log2()
    }

    pub fn coefficients(&self, identity: Identity) -> Vec<u64> {
        digits(identity - 1, self.q, self.k)
    }

    /// `T_i(r)`.
    pub fn tag(&self, identity: Identity, r: u64) -> u64 {
        eval_poly(&self.coefficients(identity), r, self.q)
    }

    /// Evaluation point used for randomness index `r`.
    pub fn eval_point(&self, r: u64) -> u64 {
        self.fixed_r.unwrap_or(r)
    }

    pub fn pack(&self, r: u64, tag: u64) -> u64 {
        (r << self.width) | tag
    }

    /// Splits an inner message into `(r, t)`; `None` if either half is not a field element.
    pub fn unpack(&self, message: u64) -> Option<(u64, u64)> {
        let mask = (1u64 << self.width) - 1;
        let (r, t) = (message >> self.width, message & mask);
        (r < self.q && t < self.q).then_some((r, t))
    }

    /// Inner message for identity `i` and randomness index `r`.
    pub fn message(&self, identity: Identity, r: u64) -> u64 {
        let point = self.eval_point(r);
        self.pack(point, self.tag(identity, point))
    }

    /// Symbol pair recovered from a received word, if valid.
    pub fn decode_pair(&self, y: &[usize]) -> Option<(u64, u64)> {
        match self.inner.decode(y) {
            Decision::Message(m) => self.unpack(m),
            Decision::Erasure => None,
        }
    }
}

impl<C: TransmissionCode> IdentificationCode for TagCode<C> {
    fn blocklength(&self) -> usize {
        self.inner.blocklength()
    }

    fn input_alphabet(&self) -> usize {
        self.inner.input_alphabet()
    }

    fn output_alphabet(&self) -> usize {
        self.inner.output_alphabet()
    }

    fn identity_count(&self) -> u128 {
        self.identity_count
    }

    fn randomness_size(&self) -> u64 {
        if self.fixed_r.is_some() {
            1
        } else {
            self.q
        }
    }

    fn encode(&self, identity: Identity, r: u64) -> Vec<usize> {
        self.inner.encode(self.message(identity, r))
    }

    fn accepts(&self, identity: Identity, y: &[usize]) -> bool {
        self.decode_pair(y).is_some_and(|(r, t)| self.tag(identity, r) == t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(q: u64, k: usize, reps: usize) -> TagCode {
        make_tag_code(TagCodeParams::with_repetition(q, k, reps).unwrap()).unwrap()
    }

    #[test]
    fn tag_of_three_plus_x() {
        let c = code(5, 2, 1);
        // coefficients (3, 1) are the digits of 8, i.e. identity 9.
        assert_eq!(c.coefficients(9), vec![3, 1]);
        assert_eq!(c.tag(9, 4), 2);
        assert_eq!(c.identity_count(), 25);
        assert_eq!(c.payload_bits(), 6);
        assert_eq!(c.blocklength(), 6);
    }

    #[test]
    fn own_transmissions_are_accepted() {
        let c = code(7, 3, 3);
        for id in [1, 2, 100, 343] {
            for r in 0..7 {
                assert!(c.accepts(id, &c.encode(id, r)));
            }
        }
    }

    #[test]
    fn invalid_symbols_are_rejected() {
        let c = code(5, 1, 1);
        // r = 7 is not a field element.
        let y = c.inner().encode(c.pack(7, 0));
        assert!((1..=5).all(|id| !c.accepts(id, &y)));
    }

    #[test]
    fn parameter_validation() {
        assert!(make_tag_code(TagCodeParams::with_repetition(6, 2, 1).unwrap()).is_err());
        assert!(make_tag_code(TagCodeParams::with_repetition(5, 0, 1).unwrap()).is_err());
        assert!(make_tag_code(TagCodeParams::with_repetition(5, 6, 1).unwrap()).is_err());
        assert!(make_tag_code(TagCodeParams::with_repetition(65521, 9, 1).unwrap()).is_err());
        let wrong_inner =
            TagCodeParams { field_size: 5, degree_bound: 2, inner_code: make_repetition_code(4, 1).unwrap() };
        assert!(make_tag_code(wrong_inner).is_err());
        assert!(TagCodeParams::with_repetition(5, 2, 2).is_err());
    }

    #[test]
    fn second_kind_bounds() {
        let b = |q, k| second_kind_bound::<f64, _>(&TagCodeParams::with_repetition(q, k, 1).unwrap());
        assert_eq!(b(5, 1), 0.0);
        assert_eq!(b(5, 2), 0.2);
        assert!((b(251, 8) - 7.0 / 251.0).abs() < 1e-15);
        assert!((b(251, 8) - 0.0279).abs() < 5e-5);
    }

    #[test]
    fn deterministic_variant_pins_randomness() {
        let c = code(5, 2, 1);
        let d = deterministic_variant(&c, 0).unwrap();
        assert_eq!(d.randomness_size(), 1);
        assert_eq!(d.encode(9, 0), c.encode(9, 0));
        assert!(deterministic_variant(&c, 5).is_err());
        // identities 1 and 6 share constant coefficient 0
        assert!(d.accepts(6, &d.encode(1, 0)));
    }

    #[test]
    fn spec_roundtrip() {
        let spec: TagCodeSpec = serde_json::from_str(r#"{"q":5,"k":2}"#).unwrap();
        assert_eq!(spec.inner_reps, 1);
        let c = spec.build().unwrap();
        assert_eq!(c.identity_count(), 25);
        assert!(serde_json::from_str::<TagCodeSpec>(r#"{"q":5,"k":2,"extra":1}"#).is_err());
    }
}
