//! Exact measures and reduced fractions.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::ParseError;

/// A non-negative exact rational, always held in lowest terms.
///
/// The canonical text form is `numerator/denominator` in base 10, so `1`
/// renders as `1/1` and zero as `0/1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MeasureValue(BigRational);

impl serde::Serialize for MeasureValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl MeasureValue {
    pub fn zero() -> Self {
        MeasureValue(BigRational::zero())
    }

    pub fn one() -> Self {
        MeasureValue(BigRational::one())
    }

    /// Panics if the ratio is negative; measures never are.
    pub fn from_ratio(r: BigRational) -> Self {
        assert!(!r.is_negative(), "negative measure {r}");
        MeasureValue(r)
    }

    pub fn new(numer: impl Into<BigUint>, denom: impl Into<BigUint>) -> Self {
        let d: BigUint = denom.into();
        assert!(!d.is_zero(), "zero denominator");
        MeasureValue(BigRational::new(
            BigInt::from_biguint(Sign::Plus, numer.into()),
            BigInt::from_biguint(Sign::Plus, d),
        ))
    }

    pub fn from_integer(n: impl Into<BigUint>) -> Self {
        Self::new(n, 1u32)
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = BigRational::one();
        for _ in 0..k {
            acc *= &self.0;
        }
        MeasureValue(acc)
    }

    /// Truncated subtraction.
    pub fn saturating_sub(&self, other: &Self) -> Self {
        if other.0 >= self.0 {
            Self::zero()
        } else {
            MeasureValue(&self.0 - &other.0)
        }
    }
}

impl Default for MeasureValue {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for MeasureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for MeasureValue {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, d) = s
            .trim()
            .split_once('/')
            .ok_or_else(|| ParseError::Fraction(s.to_string()))?;
        let n: BigUint = n.trim().parse().map_err(|_| ParseError::Fraction(s.to_string()))?;
        let d: BigUint = d.trim().parse().map_err(|_| ParseError::Fraction(s.to_string()))?;
        if d.is_zero() {
            return Err(ParseError::Fraction(s.to_string()));
        }
        Ok(MeasureValue::new(n, d))
    }
}

impl Add for MeasureValue {
    type Output = MeasureValue;
    fn add(self, rhs: Self) -> Self {
        MeasureValue(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a MeasureValue> for &'a MeasureValue {
    type Output = MeasureValue;
    fn add(self, rhs: &MeasureValue) -> MeasureValue {
        MeasureValue(&self.0 + &rhs.0)
    }
}

impl Mul for MeasureValue {
    type Output = MeasureValue;
    fn mul(self, rhs: Self) -> Self {
        MeasureValue(self.0 * rhs.0)
    }
}

impl<'a> Mul<&'a MeasureValue> for &'a MeasureValue {
    type Output = MeasureValue;
    fn mul(self, rhs: &MeasureValue) -> MeasureValue {
        MeasureValue(&self.0 * &rhs.0)
    }
}

/// Panics when the result would be negative.
impl Sub for MeasureValue {
    type Output = MeasureValue;
    fn sub(self, rhs: Self) -> Self {
        MeasureValue::from_ratio(self.0 - rhs.0)
    }
}

impl std::iter::Sum for MeasureValue {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(MeasureValue::zero(), |a, b| a + b)
    }
}

impl std::iter::Product for MeasureValue {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(MeasureValue::one(), |a, b| a * b)
    }
}

/// A positive fraction `p/q` with `gcd(p, q) = 1`.
///
/// Directions are fractions strictly between 0 and 1; see [`Fraction::parse_direction`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Fraction {
    p: u64,
    q: u64,
}

impl Fraction {
    /// Rejects zero parts and non-reduced input.
    pub fn new(p: u64, q: u64) -> Result<Self, ParseError> {
        if p == 0 || q == 0 || p.gcd(&q) != 1 {
            return Err(ParseError::Fraction(format!("{p}/{q}")));
        }
        Ok(Fraction { p, q })
    }

    /// Reduces `p/q` by the gcd.
    pub fn reduced(p: u64, q: u64) -> Result<Self, ParseError> {
        if p == 0 || q == 0 {
            return Err(ParseError::Fraction(format!("{p}/{q}")));
        }
        let g = p.gcd(&q);
        Ok(Fraction { p: p / g, q: q / g })
    }

    /// A reduced fraction in the open interval (0, 1).
    pub fn direction(p: u64, q: u64) -> Result<Self, ParseError> {
        let f = Self::new(p, q)?;
        if p >= q {
            return Err(ParseError::Direction(format!("{p}/{q}")));
        }
        Ok(f)
    }

    pub fn parse_direction(s: &str) -> Result<Self, ParseError> {
        let f: Fraction = s.parse()?;
        Self::direction(f.p, f.q)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.p), BigInt::from(self.q))
    }

    /// Exact `|self - other|`.
    pub fn distance(&self, other: &Fraction) -> BigRational {
        (self.to_ratio() - other.to_ratio()).abs()
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Fraction {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::Fraction(s.to_string());
        let (p, q) = s.trim().split_once('/').ok_or_else(bad)?;
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        Fraction::new(p, q)
    }
}

impl TryFrom<String> for Fraction {
    type Error = ParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Fraction> for String {
    fn from(f: Fraction) -> String {
        f.to_string()
    }
}

/// Parses a comma-separated list of directions; an empty string is an empty list.
pub fn parse_direction_list(s: &str) -> Result<Vec<Fraction>, ParseError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(Fraction::parse_direction)
        .collect()
}

pub(crate) fn ratio_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn parse_ratio(s: &str) -> Result<BigRational, ParseError> {
    let bad = || ParseError::Fraction(s.to_string());
    match s.trim().split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = s.trim().parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_text_form_is_reduced() {
        let m = MeasureValue::new(6u32, 8u32);
        assert_eq!(m.to_string(), "3/4");
        assert_eq!(MeasureValue::zero().to_string(), "0/1");
        assert_eq!(MeasureValue::one().to_string(), "1/1");
        assert_eq!("6/8".parse::<MeasureValue>().unwrap(), m);
    }

    #[test]
    fn fraction_rules() {
        assert!(Fraction::new(2, 4).is_err());
        assert!(Fraction::parse_direction("2/2").is_err());
        assert!(Fraction::parse_direction("3/2").is_err());
        assert_eq!(
            Fraction::parse_direction(" 1/2 ").unwrap(),
            Fraction::new(1, 2).unwrap()
        );
        assert_eq!(Fraction::reduced(4, 6).unwrap().to_string(), "2/3");
        assert_eq!(parse_direction_list("").unwrap(), vec![]);
        assert_eq!(parse_direction_list("1/2, 1/3").unwrap().len(), 2);
    }

    #[test]
    fn distance_is_exact() {
        let a = Fraction::new(1, 2).unwrap();
        let b = Fraction::new(1, 3).unwrap();
        assert_eq!(a.distance(&b), BigRational::new(1.into(), 6.into()));
    }
}
