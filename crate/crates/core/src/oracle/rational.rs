//! Exact rationals and their decimal renderings.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{pow, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Int;

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn checked_div<T: Int>(a: &Ratio<T>, b: &Ratio<T>) -> Result<Ratio<T>> {
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(a.clone() / b.clone())
}

/// Round-to-nearest at `digits` decimal places, ties away from zero.
pub fn render_decimal<T: Int>(value: &Ratio<T>, digits: usize) -> String {
    let scale: T = pow(T::from_u8(10).unwrap(), digits);
    let (q, rem) = (value.numer().abs() * scale.clone()).div_rem(value.denom());
    let two = T::from_u8(2).unwrap();
    let q = if rem * two >= *value.denom() { q + T::one() } else { q };
    let sign = if value.is_negative() && !q.is_zero() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{q}");
    }
    let (int, frac) = q.div_rem(&scale);
    format!("{sign}{int}.{frac:0>digits$}")
}

/// Number of digits after the decimal point in a printed value.
pub fn decimal_places(text: &str) -> usize {
    text.split_once('.').map_or(0, |(_, frac)| frac.len())
}

/// Parses `[-]digits[.digits]` exactly.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits_ok = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty() || !digits_ok(int) || !digits_ok(frac) || (body.contains('.') && frac.is_empty()) {
        return None;
    }
    let numer: BigInt = format!("{int}{frac}").parse().ok()?;
    let value = Rational::new(numer, pow(BigInt::from(10), frac.len()));
    Some(if negative { -value } else { value })
}

/// `10^-places` as an exact rational.
pub fn unit_in_last_place(places: usize) -> Rational {
    Rational::new(BigInt::from(1), pow(BigInt::from(10), places))
}
