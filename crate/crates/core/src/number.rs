//! Exact numbers: rationals parsed from decimal text, and lengths stored as
//! the square root of a non-negative rational.
//!
//! Euclidean distances between rational points are generally irrational, so
//! a [`Length`] keeps only its square. Ordering, equality and scaling by a
//! rational factor are all exact.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"-12.375"`, `"3"`, `"2.5e-3"` or `"7/9"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let bad = || Error::Parse(format!("not a decimal or fraction: {text:?}"));
    let s = text.trim();
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_rational(num)?;
        let d = parse_rational(den)?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(all_digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// Exact decimal text when the denominator divides a power of ten, otherwise `p/q`.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        return q.numer().to_string();
    }
    let mut den = q.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", q.numer(), q.denom());
    }
    let places = twos.max(fives);
    let scaled = q * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().abs().to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    let sign = if q.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

/// Largest rational `s <= sqrt(q)` with a denominator of the form `den * 2^m`,
/// accurate to a relative error below `2^-bits`. Exact when `q` is a perfect
/// square of a rational.
pub fn sqrt_lower(q: &Rational, bits: u32) -> Rational {
    assert!(!q.is_negative(), "sqrt of negative rational");
    if q.is_zero() {
        return Rational::zero();
    }
    if let Some(root) = exact_sqrt(q) {
        return root;
    }
    // sqrt(n/d) = sqrt(n*d)/d
    let nd = (q.numer() * q.denom()).to_biguint().expect("non-negative");
    let shift = 2 * bits as usize + 2;
    let root = (nd << shift).sqrt();
    Rational::new(
        BigInt::from_biguint(Sign::Plus, root),
        q.denom() * (BigInt::one() << (bits as usize + 1)),
    )
}

pub fn exact_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().to_biguint()?;
    let d = q.denom().to_biguint()?;
    let (rn, rd): (BigUint, BigUint) = (n.sqrt(), d.sqrt());
    if &rn * &rn == n && &rd * &rd == d {
        Some(Rational::new(BigInt::from(rn), BigInt::from(rd)))
    } else {
        None
    }
}

/// A non-negative length represented by its exact square.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Length {
    sq: Rational,
}

impl Length {
    pub fn zero() -> Self {
        Length { sq: Rational::zero() }
    }

    pub fn from_sq(sq: Rational) -> Self {
        assert!(!sq.is_negative(), "squared length must be non-negative");
        Length { sq }
    }

    pub fn from_rational(d: &Rational) -> Self {
        assert!(!d.is_negative(), "length must be non-negative");
        Length { sq: d * d }
    }

    pub fn sq(&self) -> &Rational {
        &self.sq
    }

    pub fn is_zero(&self) -> bool {
        self.sq.is_zero()
    }

    /// `factor * self` for a non-negative rational factor.
    pub fn scale(&self, factor: &Rational) -> Length {
        assert!(!factor.is_negative(), "negative scale factor");
        Length { sq: &self.sq * factor * factor }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        exact_sqrt(&self.sq)
    }

    pub fn to_f64(&self) -> f64 {
        self.sq.to_f64().unwrap_or(f64::INFINITY).sqrt()
    }
}

impl PartialOrd for Length {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Length {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sq.cmp(&other.sq)
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(r) => f.write_str(&format_rational(&r)),
            None => write!(f, "sqrt({})", format_rational(&self.sq)),
        }
    }
}

impl FromStr for Length {
    type Err = Error;

    /// Accepts plain rationals (`"1.5"`, `"3/7"`) and `"sqrt(<rational>)"`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            let sq = parse_rational(inner)?;
            if sq.is_negative() {
                return Err(Error::Parse(format!("negative radicand in {s:?}")));
            }
            return Ok(Length { sq });
        }
        let d = parse_rational(s)?;
        if d.is_negative() {
            return Err(Error::Parse(format!("negative length {s:?}")));
        }
        Ok(Length::from_rational(&d))
    }
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = NumberText::deserialize(deserializer)?;
        text.0.parse().map_err(serde::de::Error::custom)
    }
}

/// Accepts either a JSON string or a JSON number and keeps its text, so
/// numbers reach the exact parser without an f64 round trip in between.
#[derive(Debug, Clone)]
pub(crate) struct NumberText(pub String);

impl<'de> Deserialize<'de> for NumberText {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(deserializer)? {
            serde_json::Value::String(s) => Ok(NumberText(s)),
            serde_json::Value::Number(n) => Ok(NumberText(n.to_string())),
            other => Err(serde::de::Error::custom(format!("expected number, got {other}"))),
        }
    }
}

pub(crate) mod rational_text {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = NumberText::deserialize(d)?;
        parse_rational(&text.0).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("1.25").unwrap(), ratio(5, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("3").unwrap(), rat(3));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("2.5e-3").unwrap(), ratio(1, 400));
        assert_eq!(parse_rational("1E2").unwrap(), rat(100));
        assert_eq!(parse_rational("6/4").unwrap(), ratio(3, 2));
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn formats_terminating_and_repeating() {
        assert_eq!(format_rational(&ratio(5, 4)), "1.25");
        assert_eq!(format_rational(&ratio(-1, 20)), "-0.05");
        assert_eq!(format_rational(&ratio(1, 3)), "1/3");
        assert_eq!(format_rational(&rat(-7)), "-7");
    }

    #[test]
    fn length_text_forms() {
        let two: Length = "2".parse().unwrap();
        assert_eq!(two.sq(), &rat(4));
        assert_eq!(two.to_string(), "2");
        let root2 = Length::from_sq(rat(2));
        assert_eq!(root2.to_string(), "sqrt(2)");
        assert_eq!("sqrt(2)".parse::<Length>().unwrap(), root2);
        assert!("-1".parse::<Length>().is_err());
        assert!(root2 < two);
        assert_eq!(root2.scale(&rat(2)), Length::from_sq(rat(8)));
    }

    #[test]
    fn sqrt_lower_is_tight_lower_bound() {
        let q = ratio(13, 7);
        let s = sqrt_lower(&q, 32);
        assert!(&s * &s <= q);
        let bumped = &s * ratio(1_000_001, 1_000_000);
        assert!(&bumped * &bumped > q);
        assert_eq!(sqrt_lower(&ratio(9, 4), 8), ratio(3, 2));
    }

    proptest! {
        #[test]
        fn rational_text_round_trip(n in -1_000_000i64..1_000_000, d in 1i64..5000) {
            let q = ratio(n, d);
            prop_assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        }

        #[test]
        fn length_text_round_trip(n in 0i64..1_000_000, d in 1i64..5000) {
            let len = Length::from_sq(ratio(n, d));
            prop_assert_eq!(len.to_string().parse::<Length>().unwrap(), len);
        }
    }
}
