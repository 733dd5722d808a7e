//! Scalar abstraction for probabilities.
//!
//! Channel laws and exact error enumeration are written once over [`Scalar`], so the
//! same code runs in `f32`, `f64`, or exact [`Rational`] arithmetic. Anything that needs
//! logarithms (capacity) additionally requires [`num_traits::Float`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Arbitrary-precision rational used for exact enumeration.
pub type Rational = BigRational;

/// A probability-valued number type.
pub trait Scalar: Clone + PartialOrd + Num + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static {
    /// Slack allowed when checking that a probability row sums to one.
    fn row_sum_tolerance() -> Self;

    /// Builds `num / den` without going through floating point.
    fn ratio(num: u64, den: u64) -> Self {
        Self::from_u64(num).expect("u64 representable") / Self::from_u64(den).expect("u64 representable")
    }

    fn half() -> Self {
        Self::ratio(1, 2)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    fn row_sum_tolerance() -> Self {
        1e-6
    }
}

impl Scalar for f64 {
    fn row_sum_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for Rational {
    fn row_sum_tolerance() -> Self {
        Rational::from_integer(BigInt::from(0))
    }

    fn ratio(num: u64, den: u64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Kahan compensated accumulator.
///
/// In exact arithmetic the compensation term stays zero, so the same accumulator is
/// correct for every [`Scalar`].
#[derive(Clone, Debug)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
    compensate: bool,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new(compensate: bool) -> Self {
        Self { sum: T::zero(), carry: T::zero(), compensate }
    }

    /// Compensation switches on for blocklengths of 12 and above.
    pub fn for_blocklength(n: usize) -> Self {
        Self::new(n >= 12)
    }

    pub fn add(&mut self, x: T) {
        if self.compensate {
            let y = x - self.carry.clone();
            let t = self.sum.clone() + y.clone();
            self.carry = (t.clone() - self.sum.clone()) - y;
            self.sum = t;
        } else {
            self.sum = self.sum.clone() + x;
        }
    }

    pub fn value(&self) -> T {
        self.sum.clone()
    }
}

/// Sums values with compensation. `N` symbols per term drives the Kahan switch.
pub fn sum_compensated<T: Scalar, I: IntoIterator<Item = T>>(blocklength: usize, iter: I) -> T {
    let mut acc = CompensatedSum::for_blocklength(blocklength);
    for x in iter {
        acc.add(x);
    }
    acc.value()
}

/// `|a - b| <= tol` without requiring `Signed`.
pub(crate) fn within<T: Scalar>(a: &T, b: &T, tol: &T) -> bool {
    let diff = if a >= b { a.clone() - b.clone() } else { b.clone() - a.clone() };
    diff <= *tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut plain = 1.0f64;
        let mut acc = CompensatedSum::new(true);
        acc.add(1.0f64);
        for _ in 0..10_000_000 {
            plain += 1e-16;
            acc.add(1e-16);
        }
        assert_eq!(plain, 1.0);
        assert!((acc.value() - (1.0 + 1e-9)).abs() < 1e-15);
    }

    #[test]
    fn rational_ratio_is_exact() {
        let tenth = Rational::ratio(1, 10);
        let sum = sum_compensated(20, std::iter::repeat_n(tenth, 10));
        assert_eq!(sum, Rational::ratio(1, 1));
    }
}
