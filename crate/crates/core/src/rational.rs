//! Exact rational helpers shared by every module.
//!
//! Exponents and orders are small rationals and use [`Exp`] (`Ratio<i64>`),
//! which is `Copy` and cheap to compare. Laplace-domain coefficients and
//! initial data use [`Q`] (`Ratio<BigInt>`) so cross-multiplication never
//! overflows.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio, Rational64};
use num_traits::{One, ToPrimitive, Zero};

/// Exact exponent / fractional order.
pub type Exp = Rational64;

/// Exact coefficient.
pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as an exact rational")]
pub struct ParseRationalError {
    pub input: String,
}

/// Shorthand for `p/q` as an [`Exp`].
pub fn exp(p: i64, q: i64) -> Exp {
    Exp::new(p, q)
}

/// Shorthand for `p/q` as a [`Q`].
pub fn q(p: i64, d: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(d))
}

pub fn q_int(p: i64) -> Q {
    Q::from_integer(BigInt::from(p))
}

/// Parses `"3"`, `"-3/4"`, `"0.25"`, `"1.5e-3"` exactly (no binary float
/// round trip).
pub fn parse_q(input: &str) -> Result<Q, ParseRationalError> {
    let err = || ParseRationalError { input: input.to_string() };
    let s = input.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(&all_digits).map_err(|_| err())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Q::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Q::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Parses an exact exponent; accepts the same syntax as [`parse_q`].
pub fn parse_exp(input: &str) -> Result<Exp, ParseRationalError> {
    let value = parse_q(input)?;
    q_to_exp(&value).ok_or_else(|| ParseRationalError { input: input.to_string() })
}

pub fn q_to_exp(value: &Q) -> Option<Exp> {
    Some(Exp::new(value.numer().to_i64()?, value.denom().to_i64()?))
}

pub fn exp_to_q(value: Exp) -> Q {
    Q::new(BigInt::from(*value.numer()), BigInt::from(*value.denom()))
}

pub fn exp_f64(value: Exp) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

pub fn q_f64(value: &Q) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        // Ratio::to_f64 gives up on huge numerators/denominators.
        let n = value.numer().to_f64().unwrap_or(f64::NAN);
        let d = value.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Smallest integer `n` with `n - 1 < value <= n`.
pub fn ceil_exp(value: Exp) -> i64 {
    value.ceil().to_integer()
}

pub fn is_integer(value: Exp) -> bool {
    value.denom().is_one()
}

/// Renders a rational as `"p/q"` or `"p"`.
pub fn fmt_ratio<T>(value: &Ratio<T>) -> String
where
    T: Clone + Integer + fmt::Display,
{
    if value.denom().is_one() {
        format!("{}", value.numer())
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Serde adapters that store rationals as strings.
pub mod serde_str {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub trait RationalText: Sized {
        fn to_text(&self) -> String;
        fn from_text(s: &str) -> Result<Self, ParseRationalError>;
    }

    impl RationalText for Exp {
        fn to_text(&self) -> String {
            fmt_ratio(self)
        }
        fn from_text(s: &str) -> Result<Self, ParseRationalError> {
            parse_exp(s)
        }
    }

    impl RationalText for Q {
        fn to_text(&self) -> String {
            fmt_ratio(self)
        }
        fn from_text(s: &str) -> Result<Self, ParseRationalError> {
            parse_q(s)
        }
    }

    pub fn serialize<T: RationalText, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_text())
    }

    pub fn deserialize<'de, T: RationalText, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        let s = String::deserialize(d)?;
        T::from_text(&s).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<T: RationalText, S: Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                seq.serialize_element(&x.to_text())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, T: RationalText, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<T>, D::Error> {
            let raw = Vec::<String>::deserialize(d)?;
            raw.iter().map(|s| T::from_text(s).map_err(D::Error::custom)).collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<T: RationalText, S: Serializer>(
            v: &Option<T>,
            s: S,
        ) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => s.serialize_some(&x.to_text()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, T: RationalText, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Option<T>, D::Error> {
            let raw = Option::<String>::deserialize(d)?;
            raw.map(|s| T::from_text(&s).map_err(D::Error::custom)).transpose()
        }
    }
}
