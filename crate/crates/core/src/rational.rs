//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `"a/b"` or `"a"`.
pub fn parse_q(text: &str) -> Result<Q> {
    let text = text.trim();
    let bad = |msg: &str| Error::Parse {
        line: 1,
        column: 1,
        message: format!("`{text}`: {msg}"),
    };
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad("bad numerator"))?;
    let den: BigInt = den.parse().map_err(|_| bad("bad denominator"))?;
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Q::new(num, den))
}

/// Canonical `"num/den"` text; integers print without a denominator.
pub fn format_q(value: &Q) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn sum(values: &[Q]) -> Q {
    values.iter().fold(Q::zero(), |acc, v| acc + v)
}

pub fn to_f64(value: &Q) -> f64 {
    // BigInt -> f64 saturates on huge values, fine for reporting.
    use num_traits::ToPrimitive;
    value.to_f64().unwrap_or(f64::NAN)
}

pub fn is_nonnegative(value: &Q) -> bool {
    !value.is_negative()
}

pub fn pow(base: &Q, exp: u32) -> Q {
    num_traits::pow(base.clone(), exp as usize)
}

/// Serde adapter writing rationals as `"num/den"` strings.
pub mod serde_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let text = String::deserialize(d)?;
        parse_q(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for vectors of rationals.
pub mod serde_qvec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(values: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for v in values {
            seq.serialize_element(&format_q(v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| parse_q(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_q(" -6/8 ").unwrap(), q(-3, 4));
        assert_eq!(parse_q("2").unwrap(), qi(2));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
        assert_eq!(format_q(&q(6, 8)), "3/4");
        assert_eq!(format_q(&qi(-5)), "-5");
    }
}
