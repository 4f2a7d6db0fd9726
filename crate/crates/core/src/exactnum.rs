//! Exact rational scalars and rational interval arithmetic.
//!
//! Scalars are `num_rational::BigRational`, which keeps every value in
//! lowest terms with a positive denominator. Intervals carry exact rational
//! endpoints, so the only approximation anywhere in this module is the
//! square-root enclosure, whose endpoints are dyadic rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign as BigSign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("division by an interval containing zero: {0}")]
    DivisionByZeroInterval(String),
    #[error("square root of a negative number: {0}")]
    NegativeSqrt(String),
    #[error("width bound must be positive, got {0}")]
    NonPositiveWidth(String),
    #[error("interval endpoints out of order: [{lo}, {hi}]")]
    InvertedInterval { lo: String, hi: String },
    #[error("invalid rational literal `{0}`")]
    BadLiteral(String),
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `p/q`, `p`, or a decimal such as `2.75` or `1e-6`, exactly.
pub fn parse_rational(text: &str) -> Result<BigRational, ExactError> {
    let s = text.trim();
    let bad = || ExactError::BadLiteral(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_decimal(n.trim()).ok_or_else(bad)?;
        let d = parse_decimal(d.trim()).ok_or_else(bad)?;
        if d.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        return Ok(n / d);
    }
    parse_decimal(s).ok_or_else(bad)
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first()? {
        b'-' => (true, &mantissa[1..]),
        b'+' => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if all.is_empty() { "0" } else { &all }).ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -value } else { value })
}

/// The `pow` arm of the exact arithmetic: negative exponents invert.
pub fn rat_pow(base: &BigRational, exponent: i32) -> Result<BigRational, ExactError> {
    if exponent < 0 && base.is_zero() {
        return Err(ExactError::DivisionByZero);
    }
    Ok(num_traits::pow::Pow::pow(base, exponent))
}

pub fn rat_div(a: &BigRational, b: &BigRational) -> Result<BigRational, ExactError> {
    if b.is_zero() {
        return Err(ExactError::DivisionByZero);
    }
    Ok(a / b)
}

/// Exact square root if `q` is the square of a rational.
pub fn exact_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| BigRational::new(n, d))
}

/// Lossy conversion for reporting and float-path cross checks.
pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: scale through bit shifts.
        let nb = q.numer().bits() as i64;
        let db = q.denom().bits() as i64;
        let shift = nb - db;
        let scaled = if shift > 0 {
            BigRational::new(q.numer().clone(), q.denom() << (shift as usize))
        } else {
            BigRational::new(q.numer() << ((-shift) as usize), q.denom().clone())
        };
        scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
    Indeterminate,
}

/// Closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RationalInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self, ExactError> {
        if lo > hi {
            return Err(ExactError::InvertedInterval {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn point(q: BigRational) -> Self {
        Self {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&BigRational::zero())
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / int(2)
    }

    /// Zero endpoints count as indeterminate unless the interval is the point 0.
    pub fn sign(&self) -> Sign {
        let zero = BigRational::zero();
        if self.lo.is_zero() && self.hi.is_zero() {
            Sign::Zero
        } else if self.lo > zero {
            Sign::Positive
        } else if self.hi < zero {
            Sign::Negative
        } else {
            Sign::Indeterminate
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if c.is_negative() {
            Self { lo: b, hi: a }
        } else {
            Self { lo: a, hi: b }
        }
    }

    pub fn shift(&self, c: &BigRational) -> Self {
        Self {
            lo: &self.lo + c,
            hi: &self.hi + c,
        }
    }

    pub fn square(&self) -> Self {
        let a = &self.lo * &self.lo;
        let b = &self.hi * &self.hi;
        if self.contains_zero() {
            Self {
                lo: BigRational::zero(),
                hi: a.max(b),
            }
        } else if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        if k == 0 {
            return Self::point(BigRational::one());
        }
        if k % 2 == 0 {
            return self.square().pow(k / 2);
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn recip(&self) -> Result<Self, ExactError> {
        if self.contains_zero() {
            return Err(ExactError::DivisionByZeroInterval(self.to_string()));
        }
        Ok(Self {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ExactError> {
        Ok(self * &other.recip()?)
    }

    /// Widens the endpoints outward onto the grid `2^-bits`, bounding their size.
    pub fn outward_dyadic(&self, bits: u32) -> Self {
        let scale = BigInt::one() << bits as usize;
        let lo = (&self.lo * &scale).floor() / &scale;
        let hi = (&self.hi * &scale).ceil() / &scale;
        Self { lo, hi }
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Add for &RationalInterval {
    type Output = RationalInterval;
    fn add(self, rhs: Self) -> RationalInterval {
        RationalInterval {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }
}

impl Sub for &RationalInterval {
    type Output = RationalInterval;
    fn sub(self, rhs: Self) -> RationalInterval {
        RationalInterval {
            lo: &self.lo - &rhs.hi,
            hi: &self.hi - &rhs.lo,
        }
    }
}

impl Mul for &RationalInterval {
    type Output = RationalInterval;
    fn mul(self, rhs: Self) -> RationalInterval {
        let products = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = products.iter().min().cloned().unwrap();
        let hi = products.into_iter().max().unwrap();
        RationalInterval { lo, hi }
    }
}

impl Neg for &RationalInterval {
    type Output = RationalInterval;
    fn neg(self) -> RationalInterval {
        RationalInterval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }
}

/// Enclosure of `sqrt(q)` of width at most `width_bound`.
///
/// Endpoints are `floor(sqrt(q) * 2^k) / 2^k` and the next dyadic above, with
/// the smallest `k` such that `2^-k <= width_bound`. Because the grids are
/// nested, tighter bounds always give sub-intervals of looser ones. Perfect
/// squares collapse to a point.
pub fn sqrt_enclosure(
    q: &BigRational,
    width_bound: &BigRational,
) -> Result<RationalInterval, ExactError> {
    if q.is_negative() {
        return Err(ExactError::NegativeSqrt(q.to_string()));
    }
    if !width_bound.is_positive() {
        return Err(ExactError::NonPositiveWidth(width_bound.to_string()));
    }
    if let Some(root) = exact_sqrt(q) {
        return Ok(RationalInterval::point(root));
    }
    let mut k: usize = 0;
    while BigRational::new(BigInt::one(), BigInt::one() << k) > *width_bound {
        k += 1;
    }
    let denom = BigInt::one() << k;
    let four_k = BigInt::one() << (2 * k);
    let scaled = (q * BigRational::from_integer(four_k)).floor().to_integer();
    let root = floor_sqrt(&scaled);
    let lo = BigRational::new(root.clone(), denom.clone());
    let hi = BigRational::new(root + BigInt::one(), denom);
    debug_assert!(&lo * &lo <= *q && *q <= &hi * &hi);
    Ok(RationalInterval { lo, hi })
}

fn floor_sqrt(n: &BigInt) -> BigInt {
    match n.sign() {
        BigSign::Minus => BigInt::zero(),
        _ => n.sqrt(),
    }
}
