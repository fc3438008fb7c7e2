//! Exact rational helpers and the `num/den` text encoding used by every
//! persisted artifact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(value))
}

/// Formats as `num/den` in lowest terms, always with an explicit denominator.
pub fn format(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `num/den` or a bare integer. Decimal points are rejected so that
/// no binary floating point ever sneaks into a computation.
pub fn parse(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::invalid(format!("malformed rational {text:?}, expected num/den"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::invalid(format!("zero denominator in {text:?}")));
    }
    Ok(BigRational::new(num, den))
}

pub fn pow(base: &BigRational, exp: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// `C(n, k)` with the convention that it is zero outside `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn binomial_u64(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

pub fn is_probability(q: &BigRational) -> bool {
    !q.is_negative() && q <= &BigRational::one()
}
