//! Numeric backends.
//!
//! Every density, test function and functional in this crate is generic over
//! a [`Scalar`]: either exact rationals ([`Rational`], backed by big integers)
//! or `f64`. Exact instances make identities like the mean-zero property of a
//! Stein operator hold with equality, which is what lets the verification
//! sweeps distinguish "inequality violated" from "rounding noise".

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational numbers.
pub type Rational = BigRational;

/// Which arithmetic a computation ran on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Rational,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Rational => f.write_str("rational"),
            Backend::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" | "exact" => Ok(Backend::Rational),
            "float" | "f64" => Ok(Backend::Float),
            other => Err(Error::InvalidParameter(format!("unknown backend `{other}`"))),
        }
    }
}

/// Absolute tolerance used for "vanishes" on the float backend.
pub const FLOAT_TOLERANCE: f64 = 1e-10;

pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Num
    + Signed
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    const BACKEND: Backend;

    fn from_int(v: i64) -> Self;

    /// Converts a float parameter. Rationals read the shortest decimal
    /// representation, so `0.2` becomes exactly `1/5`.
    fn from_f64(v: f64) -> Result<Self>;

    /// Parses `"3"`, `"0.25"`, `"1e-3"` or `"2/7"`.
    fn parse(text: &str) -> Result<Self>;

    fn to_f64(&self) -> f64;

    fn to_rational(&self) -> Rational;

    fn from_rational(q: &Rational) -> Self;

    /// `|self|` is within `allowance`. With a zero allowance rationals must be
    /// exactly zero; floats always get [`FLOAT_TOLERANCE`] on top.
    fn vanishes(&self, allowance: f64) -> bool {
        match Self::BACKEND {
            Backend::Rational if allowance <= 0.0 => self.is_zero(),
            Backend::Rational => self.abs().to_f64() <= allowance,
            Backend::Float => self.to_f64().abs() <= FLOAT_TOLERANCE + allowance,
        }
    }

    fn is_exact() -> bool {
        Self::BACKEND == Backend::Rational
    }

    fn powi(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_f64(v: f64) -> Result<Self> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidParameter(format!("non-finite value {v}")))
        }
    }

    fn parse(text: &str) -> Result<Self> {
        let q = parse_rational(text)?;
        Ok(ToPrimitive::to_f64(&q).unwrap_or(f64::NAN))
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Rational::zero)
    }

    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Rational;

    fn from_int(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_f64(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite value {v}")));
        }
        parse_rational(&format!("{v}"))
    }

    fn parse(text: &str) -> Result<Self> {
        parse_rational(text)
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
}

fn rational_to_f64(q: &Rational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(q) {
        if v.is_finite() && (v != 0.0 || q.is_zero()) {
            return v;
        }
    }
    // Numerator and denominator too large for a direct conversion: shift both
    // down to 64 significant bits first.
    let (num, den) = (q.numer(), q.denom());
    let shift = |x: &BigInt| x.bits().saturating_sub(64);
    let (sn, sd) = (shift(num), shift(den));
    let n = (num >> sn).to_f64().unwrap_or(0.0);
    let d = (den >> sd).to_f64().unwrap_or(1.0);
    n / d * 2f64.powi(sn as i32 - sd as i32)
}

/// Exact parse of an integer, a decimal literal with optional exponent, or a
/// fraction `a/b`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::InvalidParameter(format!("cannot parse `{text}` as a number"));
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(BigInt::from_str(&all).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i64;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// Helper for mixing scalars with small integer constants.
pub fn int<S: Scalar>(v: i64) -> S {
    S::from_int(v)
}

pub fn half<S: Scalar>() -> S {
    S::one() / S::from_int(2)
}

/// Converts between backends. Going to rationals keeps every binary digit
/// of a float, going to floats rounds.
pub fn convert<A: Scalar, B: Scalar>(a: &A) -> B {
    B::from_rational(&a.to_rational())
}

pub(crate) fn checked_positive<S: Scalar>(name: &str, v: &S) -> Result<()> {
    if *v > S::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {}", v.to_f64())))
    }
}
