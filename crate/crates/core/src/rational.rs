//! Exact rational values and their text forms.
//!
//! Rationals are written as `p/q` in lowest terms, or as a bare integer when
//! the denominator is one. Parsing accepts both forms plus surrounding
//! whitespace; TOML documents may also carry plain integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Arbitrary-precision rational with a serde text representation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn new(numer: i64, denom: i64) -> Self {
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn into_inner(self) -> BigRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_ratio(&self.0, f)
    }
}

fn fmt_ratio(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Formats a rational as `p/q` (or `p` when integral).
pub fn format_ratio(r: &BigRational) -> String {
    Rational(r.clone()).to_string()
}

pub fn parse_ratio(s: &str) -> Result<BigRational, Error> {
    let t = s.trim();
    let bad = || Error::ParseRational(s.to_string());
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = t.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_ratio(s).map(Rational)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RationalVisitor;

        impl Visitor<'_> for RationalVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or a `p/q` string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::from_integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational(BigRational::from_integer(BigInt::from(v))))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(RationalVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_and_integer() {
        assert_eq!("1/2".parse::<Rational>().unwrap(), Rational::new(1, 2));
        assert_eq!(" -6/4 ".parse::<Rational>().unwrap(), Rational::new(-3, 2));
        assert_eq!("7".parse::<Rational>().unwrap(), Rational::from_integer(7));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "1/0", "a/2", "1.5", "1/2/3"] {
            assert!(s.parse::<Rational>().is_err(), "{s}");
        }
    }

    #[test]
    fn formats_lowest_terms() {
        assert_eq!(Rational::new(2, 4).to_string(), "1/2");
        assert_eq!(Rational::new(4, 2).to_string(), "2");
        assert_eq!(Rational::zero().to_string(), "0");
        assert_eq!(Rational::new(-1, 3).to_string(), "-1/3");
    }
}
