//! Prime-field arithmetic for the polynomial tag code.

/// Trial-division primality; field sizes stay well below 2^31.
pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q < 4 {
        return true;
    }
    if q.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Base-`q` digits of `value`, least significant first, padded to `len`.
pub fn digits(mut value: u128, q: u64, len: usize) -> Vec<u64> {
    let base = u128::from(q);
    (0..len)
        .map(|_| {
            let d = (value % base) as u64;
            value /= base;
            d
        })
        .collect()
}

/// Inverse of [`digits`].
pub fn from_digits(coeffs: &[u64], q: u64) -> u128 {
    coeffs.iter().rev().fold(0u128, |acc, &c| acc * u128::from(q) + u128::from(c))
}

/// Horner evaluation of `sum c_j x^j` mod `q`. Inputs must be below `q < 2^32`.
pub fn eval_poly(coeffs: &[u64], x: u64, q: u64) -> u64 {
    coeffs.iter().rev().fold(0u64, |acc, &c| (acc * x + c) % q)
}

/// `q^k` when it fits in a `u128`.
pub fn checked_pow(q: u64, k: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(u128::from(q))?;
    }
    Some(acc)
}

/// `ceil(log2 q)`, at least 1.
pub fn symbol_width(q: u64) -> usize {
    (64 - (q - 1).leading_zeros() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&q| is_prime(q)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(65521));
        assert!(!is_prime(65535));
    }

    #[test]
    fn widths() {
        assert_eq!(symbol_width(2), 1);
        assert_eq!(symbol_width(5), 3);
        assert_eq!(symbol_width(8), 3);
        assert_eq!(symbol_width(17), 5);
        assert_eq!(symbol_width(251), 8);
    }

    #[test]
    fn horner_and_digits() {
        // 3 + x at x = 4 over Z_5.
        assert_eq!(eval_poly(&[3, 1], 4, 5), 2);
        assert_eq!(digits(8, 5, 2), vec![3, 1]);
        assert_eq!(from_digits(&[3, 1], 5), 8);
        assert_eq!(checked_pow(251, 8), Some(251u128.pow(8)));
        assert_eq!(checked_pow(65521, 9), None);
    }
}
