//! Numeric backends for every table, distance and value in the crate.
//!
//! Two arithmetics are supported behind one trait:
//!
//! - [`Rational`]: exact `i128` rationals. All equalities in the dynamic
//!   programs hold bit-for-bit and bound checks compare with zero slack.
//! - [`Float`]: totally ordered `f64`. Needed whenever distances are
//!   irrational (Euclidean grids); bound checks then use a `1e-9` slack.
//!
//! The value `-inf` of a cost distribution is never represented as a number;
//! it is encoded by absence from a support map.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_integer::Roots;
use num_rational::Ratio;
use ordered_float::OrderedFloat;

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;
pub type Float = OrderedFloat<f64>;

/// Ordered field operations plus parsing and rendering.
pub trait Scalar:
    Copy
    + Ord
    + Hash
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// `true` when arithmetic is exact and comparisons need no slack.
    const EXACT: bool;
    /// Short name used in manifests and error messages.
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Parses `"3"`, `"-1/2"`, `"0.25"`.
    fn parse(text: &str) -> Result<Self>;
    /// Square root, `None` if it is not representable.
    fn sqrt(self) -> Option<Self>;
    fn to_f64(self) -> f64;
    /// `p/q` for exact values, 12 significant digits for floats.
    fn render(&self) -> String;
    /// Slack used by inequality checks: zero for exact arithmetic.
    fn tolerance() -> Self;

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    /// `a <= b` up to [`Scalar::tolerance`].
    fn le_tol(self, other: Self) -> bool {
        self <= other + Self::tolerance()
    }

    /// `a == b` up to [`Scalar::tolerance`].
    fn eq_tol(self, other: Self) -> bool {
        (self - other).abs() <= Self::tolerance()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const NAME: &'static str = "exact";

    fn zero() -> Self {
        Ratio::from_integer(0)
    }

    fn one() -> Self {
        Ratio::from_integer(1)
    }

    fn from_int(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(num as i128, den as i128)
    }

    fn parse(text: &str) -> Result<Self> {
        parse_rational(text).ok_or_else(|| Error::Parse(format!("not an exact number: {text:?}")))
    }

    fn sqrt(self) -> Option<Self> {
        let (n, d) = (*self.numer(), *self.denom());
        if n < 0 {
            return None;
        }
        let (rn, rd) = (n.sqrt(), d.sqrt());
        (rn * rn == n && rd * rd == d).then(|| Ratio::new(rn, rd))
    }

    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }

    fn render(&self) -> String {
        self.to_string()
    }

    fn tolerance() -> Self {
        Self::zero()
    }
}

impl Scalar for Float {
    const EXACT: bool = false;
    const NAME: &'static str = "float";

    fn zero() -> Self {
        OrderedFloat(0.0)
    }

    fn one() -> Self {
        OrderedFloat(1.0)
    }

    fn from_int(v: i64) -> Self {
        OrderedFloat(v as f64)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        OrderedFloat(num as f64 / den as f64)
    }

    fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some(r) = parse_rational(t) {
            return Ok(OrderedFloat(r.to_f64()));
        }
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(OrderedFloat(v)),
            _ => Err(Error::Parse(format!("not a finite number: {text:?}"))),
        }
    }

    fn sqrt(self) -> Option<Self> {
        (self.0 >= 0.0).then(|| OrderedFloat(self.0.sqrt()))
    }

    fn to_f64(self) -> f64 {
        self.0
    }

    fn render(&self) -> String {
        render_significant(self.0, 12)
    }

    fn tolerance() -> Self {
        OrderedFloat(1e-9)
    }
}

fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: i128 = n.trim().parse().ok()?;
        let d: i128 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Ratio::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    if frac_part.len() > 30 {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: i128 = if digits.is_empty() {
        0
    } else {
        digits.parse().ok()?
    };
    if neg {
        num = -num;
    }
    let den = 10i128.checked_pow(frac_part.len() as u32)?;
    Some(Ratio::new(num, den))
}

fn render_significant(v: f64, digits: i32) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

/// Parses a value for either backend, used by the problem-file loader.
pub fn parse_value<S: Scalar>(text: &str) -> Result<S> {
    S::parse(text)
}
