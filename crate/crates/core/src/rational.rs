//! Exact rational numbers and the handful of helpers the constructions need.
//!
//! Every endpoint, node and node value in this crate is a [`Rational`]. Floats
//! only appear at the very end of a computation (logarithms, Hausdorff sums).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in canonical form (gcd 1, positive denominator).
pub type Rational = BigRational;

/// Budget applied to node counts and enumerations when nothing else is given.
pub const DEFAULT_BUDGET: usize = 10_000_000;

/// Enumeration cap, overridable through the `MEANDIM_BUDGET` environment variable.
pub fn default_budget() -> usize {
    std::env::var("MEANDIM_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&b| b > 0)
        .unwrap_or(DEFAULT_BUDGET)
}

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"p/q"` or `"p"`. Decimal and exponent notation are refused.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::ParseRational(text.to_string());
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let is_int = |s: &str| {
        let digits = s
            .strip_prefix('-')
            .or_else(|| s.strip_prefix('+'))
            .unwrap_or(s);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !is_int(num) || !is_int(den) {
        return Err(bad());
    }
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

/// Canonical `"p/q"` text; the denominator is always written.
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn to_f64(q: &Rational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() && (v != 0.0 || q.is_zero()) {
            return v;
        }
    }
    // Very large or very small magnitudes: go through logarithms.
    let sign = if q.is_negative() { -1.0 } else { 1.0 };
    sign * ln_abs(q).exp()
}

/// Natural logarithm of a big unsigned integer, valid far beyond f64 range.
pub fn ln_biguint(n: &BigUint) -> f64 {
    assert!(!n.is_zero(), "ln of zero");
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().expect("64-bit prefix");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln |q|` for nonzero `q`.
pub fn ln_abs(q: &Rational) -> f64 {
    let num = q.numer().abs().to_biguint().expect("nonnegative");
    let den = q.denom().to_biguint().expect("positive");
    ln_biguint(&num) - ln_biguint(&den)
}

pub fn pow_big(base: u64, exp: u64) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}

pub fn pow3(exp: u64) -> BigUint {
    pow_big(3, exp)
}

pub fn from_biguint(n: BigUint) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `3^(-x)` for a nonnegative rational exponent.
///
/// Integer exponents are exact. Fractional exponents are irrational, so the
/// value is the binary rational nearest to the f64 result.
pub fn pow3_neg(x: &Rational) -> Result<Rational> {
    if x.is_negative() {
        return Err(Error::invalid("exponent of 3^(-x) must be nonnegative"));
    }
    if x.is_integer() {
        let e = x
            .to_integer()
            .to_u64()
            .ok_or_else(|| Error::invalid("exponent too large"))?;
        return Ok(Rational::new(BigInt::one(), BigInt::from(pow3(e))));
    }
    let v = 3f64.powf(-to_f64(x));
    if v == 0.0 || !v.is_finite() {
        return Err(Error::invalid(format!(
            "3^(-{}) underflows",
            format_rational(x)
        )));
    }
    Rational::from_float(v).ok_or_else(|| Error::invalid("non-finite power"))
}

pub fn min_q<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max_q<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a >= b {
        a
    } else {
        b
    }
}

/// Largest power of two `2^-j` (j ≥ 0) that is `<= bound`; `None` if `bound <= 0`.
pub fn dyadic_floor(bound: &Rational) -> Option<Rational> {
    if !bound.is_positive() {
        return None;
    }
    let mut d = Rational::one();
    let two = int(2);
    while &d > bound {
        d /= &two;
    }
    Some(d)
}

/// Serde adapters that encode rationals as `"p/q"` strings.
pub mod serde_str {
    use super::*;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(de::Error::custom)
    }
}

pub mod serde_vec {
    use super::*;
    use serde::{de, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        items: &[Rational],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(items.len()))?;
        for q in items {
            seq.serialize_element(&format_rational(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| parse_rational(t).map_err(de::Error::custom))
            .collect()
    }
}
