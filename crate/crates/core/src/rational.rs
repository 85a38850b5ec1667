//! Exact rational arithmetic used throughout the library.
//!
//! All probability values and decomposition coefficients are
//! arbitrary-precision rationals kept in lowest terms with a positive
//! denominator. No floating point is used anywhere.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

pub type Rational = BigRational;

/// Shorthand for building a rational from machine integers.
pub fn rat(numer: i64, denom: i64) -> Rational {
    assert!(denom != 0, "zero denominator");
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses a rational literal: an optionally signed integer or `num/den`.
///
/// Decimal notation is rejected; the instance format is exact by
/// construction and a `0.5` would silently suggest otherwise.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty rational literal".to_string());
    }
    if text.contains('.') {
        return Err(format!(
            "decimal literal '{text}' rejected: use exact rationals like 1/2"
        ));
    }
    match text.split_once('/') {
        None => {
            let n: BigInt = text
                .parse()
                .map_err(|_| format!("invalid integer '{text}'"))?;
            Ok(Rational::from(n))
        }
        Some((num, den)) => {
            let n: BigInt = num
                .trim()
                .parse()
                .map_err(|_| format!("invalid numerator '{num}'"))?;
            let d: BigInt = den
                .trim()
                .parse()
                .map_err(|_| format!("invalid denominator '{den}'"))?;
            if d.is_zero() {
                return Err(format!("zero denominator in '{text}'"));
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Checks that a value lies in the closed interval [0, 1].
pub fn in_unit_interval(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}
