//! Exact rational helpers shared across modules.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn from_uint(v: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(v.clone()))
}

pub fn from_u64(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `p/q` or a bare integer.
pub fn parse(text: &str) -> Result<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in {text:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in {text:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Parses a strictly positive accuracy parameter.
pub fn parse_epsilon(text: &str) -> Result<Rational> {
    let eps = parse(text)?;
    if !eps.is_positive() {
        return Err(Error::Parameter(format!("epsilon must be positive, got {text}")));
    }
    Ok(eps)
}

/// Always `p/q`, including integers (`3/1`).
pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn floor_to_uint(r: &Rational) -> BigUint {
    let f = r.floor().to_integer();
    f.to_biguint().unwrap_or_default()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Bit length of a non-negative integer; zero has length 0.
pub fn bit_length(v: &BigUint) -> u64 {
    v.bits()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let r = parse("6/8").unwrap();
        assert_eq!(format(&r), "3/4");
        assert_eq!(format(&parse("5").unwrap()), "5/1");
        assert_eq!(format(&parse("-2/4").unwrap()), "-1/2");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("1/0").is_err());
        assert!(parse("0.5").is_err());
        assert!(parse_epsilon("0/3").is_err());
        assert!(parse_epsilon("-1/3").is_err());
    }
}
