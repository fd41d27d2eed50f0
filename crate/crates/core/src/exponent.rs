//! Exact rational exponents with a symbolic `∞`.
//!
//! An [`Exponent`] stores its reciprocal, so `∞` is the reciprocal `0` and
//! every formula written in terms of `1/p` stays exact and branch-free.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"5/2"`, `"-3"` or a finite decimal such as `"1.25"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp10) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() || !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let n: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
    let scale = exp10 - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut q = Rational::from_integer(n);
    if scale >= 0 {
        q *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -q } else { q })
}

/// Best rational approximation of a finite float, exact for dyadic floats.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::InvalidExponent(format!("{x} is not finite")))
}

/// `{num, den}` with machine integers when they fit, decimal strings otherwise.
#[derive(Serialize, Deserialize)]
struct Pair {
    num: serde_json::Value,
    den: serde_json::Value,
}

fn big_to_json(n: &BigInt) -> serde_json::Value {
    match n.to_i64() {
        Some(v) => v.into(),
        None => n.to_string().into(),
    }
}

fn big_from_json(v: &serde_json::Value) -> Option<BigInt> {
    match v {
        serde_json::Value::Number(n) => n.as_i64().map(BigInt::from),
        serde_json::Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

pub mod rational_serde {
    //! Serde adapter writing a [`Rational`](super::Rational) as `{num, den}`.
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, ser: S) -> std::result::Result<S::Ok, S::Error> {
        Pair { num: big_to_json(q.numer()), den: big_to_json(q.denom()) }.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Rational, D::Error> {
        let pair = Pair::deserialize(de)?;
        let num = big_from_json(&pair.num).ok_or_else(|| D::Error::custom("bad numerator"))?;
        let den = big_from_json(&pair.den).ok_or_else(|| D::Error::custom("bad denominator"))?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Rational::new(num, den))
    }
}

/// A Lebesgue-type exponent `p ∈ (0, ∞]`, stored as `1/p ∈ [0, ∞)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent {
    recip: Rational,
}

impl Exponent {
    pub fn new(p: Rational) -> Result<Self> {
        if !p.is_positive() {
            return Err(Error::InvalidExponent(format!("{p} is not positive")));
        }
        Ok(Self { recip: p.recip() })
    }

    pub fn from_recip(recip: Rational) -> Result<Self> {
        if recip.is_negative() {
            return Err(Error::InvalidExponent(format!("reciprocal {recip} is negative")));
        }
        Ok(Self { recip })
    }

    pub fn int(p: i64) -> Self {
        Self::new(int(p)).expect("positive integer exponent")
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(rat(num, den)).expect("positive rational exponent")
    }

    pub fn infinity() -> Self {
        Self { recip: Rational::zero() }
    }

    pub fn one() -> Self {
        Self { recip: Rational::one() }
    }

    pub fn recip(&self) -> &Rational {
        &self.recip
    }

    pub fn is_infinite(&self) -> bool {
        self.recip.is_zero()
    }

    /// `p` itself, `None` for `∞`.
    pub fn value(&self) -> Option<Rational> {
        (!self.is_infinite()).then(|| self.recip.recip())
    }

    pub fn to_f64(&self) -> f64 {
        match self.value() {
            Some(p) => to_f64(&p),
            None => f64::INFINITY,
        }
    }

    /// `p'` with `1/p + 1/p' = 1`; requires `p >= 1`.
    pub fn conjugate(&self) -> Result<Self> {
        if self.recip > Rational::one() {
            return Err(Error::InvalidExponent(format!("{self} < 1 has no conjugate")));
        }
        Ok(Self { recip: Rational::one() - &self.recip })
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(p) => write!(f, "{p}"),
            None => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::infinity()),
            t => Self::new(parse_rational(t)?),
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.recip.cmp(&self.recip)
    }
}

/// `{num, den}` for `p = num/den`; `∞` is `{num: 1, den: 0}`.
impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let (num, den) = match self.value() {
            Some(p) => (big_to_json(p.numer()), big_to_json(p.denom())),
            None => (1.into(), 0.into()),
        };
        Pair { num, den }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let pair = Pair::deserialize(de)?;
        let num = big_from_json(&pair.num).ok_or_else(|| D::Error::custom("bad numerator"))?;
        let den = big_from_json(&pair.den).ok_or_else(|| D::Error::custom("bad denominator"))?;
        if den.is_zero() {
            return if num.is_positive() {
                Ok(Exponent::infinity())
            } else {
                Err(D::Error::custom("zero denominator"))
            };
        }
        Exponent::new(Rational::new(num, den)).map_err(D::Error::custom)
    }
}
