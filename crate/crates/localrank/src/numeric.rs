//! Small helpers for exact rational arithmetic.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses "3/10", "0.3", "-1.25e-2" or "7" into an exact rational.
///
/// Decimal strings are converted digit-by-digit, not through f64, so
/// `0.3` really is 3/10.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse `{s}` as a rational number"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    // decimal with optional exponent
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i64 = e.parse().map_err(|_| bad())?;
            (m, exp)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['-', '+']);
    if !int_digits.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_digits}{frac_part}");
    let digits = if digits.is_empty() { "0".to_string() } else { digits };
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let mut value = BigRational::from_integer(n);
    let scale = exp - frac_part.len() as i64;
    let ten = BigRational::from_integer(BigInt::from(10));
    let factor = num::pow::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// α^k for a rational α.
pub fn pow(base: &BigRational, k: usize) -> BigRational {
    num::pow::pow(base.clone(), k)
}

/// Nearest positive integer: values below 1/2 round up to 1, ties at
/// x.5 round up.
pub fn round_to_positive_integer(x: &BigRational) -> u64 {
    if x <= &BigRational::zero() {
        return 1;
    }
    let half = ratio(1, 2);
    let shifted = x + half;
    let floor = shifted.floor().to_integer();
    let r = floor.to_u64().unwrap_or(u64::MAX);
    r.max(1)
}

/// Nearest nonnegative integer, ties at x.5 round up.
pub fn round_to_nonneg_integer(x: &BigRational) -> u64 {
    if x <= &BigRational::zero() {
        return 0;
    }
    let shifted = x + ratio(1, 2);
    shifted.floor().to_integer().to_u64().unwrap_or(u64::MAX)
}

/// |a/b - 1| <= tol, all exact.
pub fn within_relative(a: &BigRational, b: &BigRational, tol: &BigRational) -> bool {
    if b.is_zero() {
        return a.is_zero();
    }
    ((a / b) - BigRational::one()).abs() <= *tol
}
