//! Coefficient fields.
//!
//! Everything polynomial in this crate is generic over [`Scalar`], which has
//! two implementations: arbitrary-precision [`Rational`] for the exact path
//! and `f64` for dihedral data whose reflections involve irrational cosines.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

pub type Rational = num::BigRational;

/// Default absolute tolerance of the float path.
pub const FLOAT_TOL: f64 = 1e-12;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Totally ordered key used to deduplicate and sort points.
    type Key: Ord + Clone + Debug + Send + Sync;

    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Fails on the exact path: floats never silently become rationals.
    fn from_f64(v: f64) -> Result<Self>;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    /// Exact zero test on the rational path, `|x| <= tol` on the float path.
    fn is_zero_within(&self, tol: f64) -> bool;
    fn key(&self) -> Self::Key;
    fn to_json(&self) -> Value;
    fn parse(s: &str) -> Result<Self>;

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => Self::parse(s),
            Value::Number(n) => Self::parse(&n.to_string()),
            other => Err(Error::Parse(format!("expected scalar, got {other}"))),
        }
    }

    fn powi(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }

    /// `max(|a|, |b|)` helper for sup-norm folds.
    fn max_abs(a: Self, b: &Self) -> Self {
        let b = b.abs();
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for Rational {
    type Key = Rational;
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn from_f64(v: f64) -> Result<Self> {
        Err(Error::InexactData(format!("float {v} on the exact path")))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn is_zero_within(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn key(&self) -> Self::Key {
        self.clone()
    }

    fn to_json(&self) -> Value {
        Value::String(format!("{}/{}", self.numer(), self.denom()))
    }

    fn parse(s: &str) -> Result<Self> {
        parse_rational(s)
    }
}

impl Scalar for f64 {
    type Key = i64;
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_f64(v: f64) -> Result<Self> {
        Ok(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn is_zero_within(&self, tol: f64) -> bool {
        f64::abs(*self) <= tol
    }

    fn key(&self) -> Self::Key {
        // 1e-9 grid; orbit points closer than that are identified.
        (self * 1e9).round() as i64
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    fn parse(s: &str) -> Result<Self> {
        if s.contains('/') {
            return Ok(Scalar::from_rational(&parse_rational(s)?));
        }
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
    }
}

/// Parses `"p/q"`, integers, and finite decimals (`"-1.25"`, `"3e-2"`) exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let negative = int_part.starts_with('-');
    let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut value = Rational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num::pow(ten, scale as usize);
    } else {
        value /= num::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// Parses a comma-separated point such as `"1,2"` or `"1/2, -3"`.
pub fn parse_point<S: Scalar>(s: &str) -> Result<Vec<S>> {
    s.split(',').map(S::parse).collect()
}

pub fn point_to_json<S: Scalar>(x: &[S]) -> Value {
    Value::Array(x.iter().map(Scalar::to_json).collect())
}

pub fn point_from_json<S: Scalar>(v: &Value) -> Result<Vec<S>> {
    v.as_array()
        .ok_or_else(|| Error::Parse("expected a coordinate array".into()))?
        .iter()
        .map(S::from_json)
        .collect()
}

pub fn point_key<S: Scalar>(x: &[S]) -> Vec<S::Key> {
    x.iter().map(Scalar::key).collect()
}

pub fn to_f64_vec<S: Scalar>(x: &[S]) -> Vec<f64> {
    x.iter().map(Scalar::to_f64).collect()
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn norm_sq<S: Scalar>(a: &[S]) -> S {
    dot(a, a)
}

pub fn sub_vec<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}
