//! Exact p-adic scalars and log-scale norm algebra.
//!
//! Every norm handled by this crate has the form `p^{-w}` with `w` rational,
//! so norms are stored as their exponent `w` and all arithmetic stays exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Returns true when `p` is a prime number.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// `p`-adic valuation of a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u64) -> u64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

/// `p`-adic valuation of a rational, `None` standing for `+∞` at zero.
pub fn rational_valuation(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let num = int_valuation(x.numer(), p) as i64;
    let den = int_valuation(x.denom(), p) as i64;
    Some(num - den)
}

/// `v_p(n!)` by Legendre's formula.
pub fn factorial_valuation(n: u64, p: u64) -> u64 {
    let mut total = 0;
    let mut q = n;
    while q > 0 {
        q /= p;
        total += q;
    }
    total
}

/// Formats a rational as `num/den`, omitting the denominator when it is 1.
pub fn format_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `num/den` or `num` (base 10, optional sign).
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

pub(crate) fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// An exact rational together with the prime defining its absolute value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicRational {
    value: BigRational,
    prime: u64,
}

impl PAdicRational {
    pub fn new(value: BigRational, prime: u64) -> Result<Self> {
        check_prime(prime)?;
        Ok(Self { value, prime })
    }

    pub(crate) fn new_unchecked(value: BigRational, prime: u64) -> Self {
        Self { value, prime }
    }

    pub fn from_integer(n: i64, prime: u64) -> Result<Self> {
        Self::new(BigRational::from_integer(n.into()), prime)
    }

    pub fn from_ratio(num: i64, den: i64, prime: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        Self::new(BigRational::new(num.into(), den.into()), prime)
    }

    pub fn parse(s: &str, prime: u64) -> Result<Self> {
        Self::new(parse_rational(s)?, prime)
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// `v` with `|x| = p^{-v}`; `None` is `+∞` and occurs exactly at zero.
    pub fn valuation(&self) -> Option<i64> {
        rational_valuation(&self.value, self.prime)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    pub fn lognorm(&self) -> LogNorm {
        match self.valuation() {
            Some(v) => LogNorm::from_integer(v),
            None => LogNorm::ZERO,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::new_unchecked(self.value.recip(), self.prime))
    }

    fn same_prime(&self, other: &Self) {
        assert_eq!(self.prime, other.prime, "mixing scalars over different primes");
    }
}

impl fmt::Display for PAdicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.value))
    }
}

impl Add for &PAdicRational {
    type Output = PAdicRational;
    fn add(self, rhs: &PAdicRational) -> PAdicRational {
        self.same_prime(rhs);
        PAdicRational::new_unchecked(&self.value + &rhs.value, self.prime)
    }
}

impl Sub for &PAdicRational {
    type Output = PAdicRational;
    fn sub(self, rhs: &PAdicRational) -> PAdicRational {
        self.same_prime(rhs);
        PAdicRational::new_unchecked(&self.value - &rhs.value, self.prime)
    }
}

impl Mul for &PAdicRational {
    type Output = PAdicRational;
    fn mul(self, rhs: &PAdicRational) -> PAdicRational {
        self.same_prime(rhs);
        PAdicRational::new_unchecked(&self.value * &rhs.value, self.prime)
    }
}

impl Neg for &PAdicRational {
    type Output = PAdicRational;
    fn neg(self) -> PAdicRational {
        PAdicRational::new_unchecked(-&self.value, self.prime)
    }
}

/// A norm `p^{-exponent}`; an absent exponent (`+∞`) is the zero norm.
///
/// Ordering follows the norm, not the exponent: a larger exponent is a
/// smaller norm, and the zero norm is the least element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LogNorm {
    exponent: Option<BigRational>,
}

impl LogNorm {
    pub const ZERO: LogNorm = LogNorm { exponent: None };

    pub fn one() -> Self {
        Self::from_exponent(BigRational::zero())
    }

    pub fn from_exponent(exponent: BigRational) -> Self {
        Self {
            exponent: Some(exponent),
        }
    }

    pub fn from_integer(e: i64) -> Self {
        Self::from_exponent(BigRational::from_integer(e.into()))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_exponent(BigRational::new(num.into(), den.into()))
    }

    /// The norm `p^{-1/(p-1)}` of the base field's `∂` at radius 1.
    pub fn dwork(p: u64) -> Self {
        Self::from_exponent(BigRational::new(1.into(), BigInt::from(p - 1)))
    }

    /// `None` for the zero norm.
    pub fn exponent(&self) -> Option<&BigRational> {
        self.exponent.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.exponent.is_none()
    }

    /// Norm of a product.
    pub fn mul(&self, other: &Self) -> Self {
        match (&self.exponent, &other.exponent) {
            (Some(a), Some(b)) => Self::from_exponent(a + b),
            _ => Self::ZERO,
        }
    }

    /// Multiplies the norm by `p^{-shift}`.
    pub fn shift(&self, shift: &BigRational) -> Self {
        match &self.exponent {
            Some(a) => Self::from_exponent(a + shift),
            None => Self::ZERO,
        }
    }

    /// `|x|^k` for a rational power `k`; `k` must be positive when `x = 0`.
    pub fn pow(&self, k: &BigRational) -> Self {
        match &self.exponent {
            Some(a) => Self::from_exponent(a * k),
            None => {
                debug_assert!(k.is_positive());
                Self::ZERO
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.exponent {
            Some(e) => rational_to_f64(e),
            None => f64::INFINITY,
        }
    }
}

impl PartialOrd for LogNorm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LogNorm {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.exponent, &other.exponent) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => b.cmp(a),
        }
    }
}

impl fmt::Display for LogNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exponent {
            Some(e) => f.write_str(&format_rational(e)),
            None => f.write_str("inf"),
        }
    }
}

impl FromStr for LogNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" => Ok(Self::ZERO),
            other => Ok(Self::from_exponent(parse_rational(other)?)),
        }
    }
}

/// Ultrametric maximum of two norms.
pub fn lognorm_max(a: LogNorm, b: LogNorm) -> LogNorm {
    a.max(b)
}

/// A radius `p^{-r}` with `r ≥ 0` rational, or the centre of a disc (`ρ = 0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LogRadius {
    Exp(BigRational),
    DiscCenter,
}

impl LogRadius {
    pub fn new(exponent: BigRational) -> Result<Self> {
        if exponent.is_negative() {
            return Err(Error::InvalidRadius(format!(
                "radius exponent {} is negative",
                format_rational(&exponent)
            )));
        }
        Ok(LogRadius::Exp(exponent))
    }

    pub fn one() -> Self {
        LogRadius::Exp(BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        Self::new(BigRational::new(num.into(), den.into()))
    }

    pub fn exponent(&self) -> Option<&BigRational> {
        match self {
            LogRadius::Exp(r) => Some(r),
            LogRadius::DiscCenter => None,
        }
    }

    pub fn is_disc_center(&self) -> bool {
        matches!(self, LogRadius::DiscCenter)
    }

    /// `ρ = 1`.
    pub fn is_one(&self) -> bool {
        matches!(self, LogRadius::Exp(r) if r.is_zero())
    }
}

impl fmt::Display for LogRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogRadius::Exp(r) => f.write_str(&format_rational(r)),
            LogRadius::DiscCenter => f.write_str("center"),
        }
    }
}

impl FromStr for LogRadius {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "center" | "inf" => Ok(LogRadius::DiscCenter),
            other => Self::new(parse_rational(other)?),
        }
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_string())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(de::Error::custom)
            }
        }
    };
}

string_serde!(LogNorm);
string_serde!(LogRadius);

/// Serde adapter for `BigRational` fields written as `"num/den"`.
pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(de::Error::custom)
    }
}
