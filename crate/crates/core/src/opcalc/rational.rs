//! Exact rational scalars backing every coefficient in the operator calculus.
//!
//! Arbitrary-precision rationals are used throughout so that factorial-like
//! denominators (720, 5040, ...) never overflow and every identity holds
//! exactly. `num_rational::BigRational` already maintains the invariants we
//! need: the stored fraction is always fully reduced and the denominator is
//! always positive.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number with arbitrary-precision integer parts.
pub type Rational = num_rational::BigRational;

/// Shorthand for a rational from machine integers.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Shorthand for an integer-valued rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// n! as an exact integer.
pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, k| acc * k)
}

/// Lossy conversion to `f64` (round-to-nearest).
pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().expect("rational magnitude representable as f64")
}

/// Renders `q` as `num/den` with the denominator always present,
/// e.g. `-7/240`, `1/1`.
pub fn fmt_ratio(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseRatioError {
    #[error("empty ratio literal")]
    Empty,
    #[error("invalid ratio literal `{0}`: expected `a/b`, an integer, or a decimal")]
    Invalid(String),
    #[error("zero denominator in ratio literal `{0}`")]
    ZeroDenominator(String),
}

/// Parses an exact rational from `a/b`, integer, or decimal notation.
///
/// Decimal literals are exact: `"0.1"` parses to 1/10, not to the nearest
/// binary float.
pub fn parse_ratio(s: &str) -> Result<Rational, ParseRatioError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRatioError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| ParseRatioError::Invalid(s.to_owned()))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| ParseRatioError::Invalid(s.to_owned()))?;
        if den.is_zero() {
            return Err(ParseRatioError::ZeroDenominator(s.to_owned()));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole: BigInt = if whole.is_empty() || whole == "-" || whole == "+" {
            BigInt::zero()
        } else {
            whole
                .parse()
                .map_err(|_| ParseRatioError::Invalid(s.to_owned()))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseRatioError::Invalid(s.to_owned()));
        }
        let frac_digits = frac.len() as u32;
        let frac_part: BigInt = frac
            .parse()
            .map_err(|_| ParseRatioError::Invalid(s.to_owned()))?;
        let scale = BigInt::from(10).pow(frac_digits);
        let mut numer = whole.abs() * &scale + frac_part;
        if negative {
            numer = -numer;
        }
        return Ok(Rational::new(numer, scale));
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| ParseRatioError::Invalid(s.to_owned()))?;
    Ok(Rational::from_integer(n))
}
