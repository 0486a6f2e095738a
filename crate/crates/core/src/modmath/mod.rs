//! Integer and modular arithmetic primitives.
//!
//! Residues are always held in canonical form `[0, n)`. Negative values only
//! ever appear in the rational oracle's rendering of published numbers.

mod prime;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Int;

pub use prime::{is_probable_prime, random_probable_prime, MILLER_RABIN_ROUNDS, SMALL_PRIMES};

/// Non-negative greatest common divisor. Signs are ignored and `gcd(0, 0) = 0`.
pub fn gcd<T: Int>(a: &T, b: &T) -> T {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = a.mod_floor(&b);
        a = std::mem::replace(&mut b, r);
    }
    a
}

/// `a mod n` in `[0, n)`, correct for negative `a`.
pub fn canonical<T: Int>(a: &T, n: &T) -> Result<Residue<T>> {
    Residue::new(a.clone(), n.clone())
}

/// The `x` in `[0, n)` with `a * x ≡ 1 (mod n)`, via the extended Euclidean
/// algorithm.
pub fn mod_inverse<T: Int>(a: &T, n: &T) -> Result<Residue<T>> {
    check_modulus(n)?;
    let (mut old_r, mut r) = (a.mod_floor(n), n.clone());
    let (mut old_s, mut s) = (T::one(), T::zero());
    while !r.is_zero() {
        let q = old_r.div_floor(&r);
        let next_r = old_r - q.clone() * r.clone();
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = old_s - q * s.clone();
        old_s = std::mem::replace(&mut s, next_s);
    }
    if !old_r.is_one() {
        return Err(Error::not_coprime(a.to_string()));
    }
    Residue::new(old_s, n.clone())
}

fn check_modulus<T: Int>(n: &T) -> Result<()> {
    if *n < T::from_u8(2).unwrap() {
        return Err(Error::InvalidParameter(format!("modulus {n} is below 2")));
    }
    Ok(())
}

/// Parses a canonical decimal: ASCII digits only, no sign, no leading zeros
/// except the single digit `0`.
pub fn parse_canonical_decimal<T: FromStr>(s: &str) -> Option<T> {
    let canonical = !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) && (s == "0" || !s.starts_with('0'));
    if canonical {
        s.parse().ok()
    } else {
        None
    }
}

/// A value reduced modulo `modulus`, kept in `[0, modulus)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Residue<T> {
    value: T,
    modulus: T,
}

impl<T: Int> Residue<T> {
    pub fn new(value: T, modulus: T) -> Result<Self> {
        check_modulus(&modulus)?;
        Ok(Residue {
            value: value.mod_floor(&modulus),
            modulus,
        })
    }

    pub fn value(&self) -> &T {
        &self.value
    }

    pub fn modulus(&self) -> &T {
        &self.modulus
    }

    pub fn into_value(self) -> T {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn inverse(&self) -> Result<Self> {
        mod_inverse(&self.value, &self.modulus)
    }

    /// Same modulus, different value.
    pub fn with_value(&self, value: T) -> Self {
        Residue {
            value: value.mod_floor(&self.modulus),
            modulus: self.modulus.clone(),
        }
    }

    pub fn is_coprime(&self) -> bool {
        gcd(&self.value, &self.modulus).is_one()
    }

    fn combine(&self, rhs: &Self, op: impl FnOnce(T, T) -> T) -> Self {
        assert_eq!(self.modulus, rhs.modulus, "residues under different moduli");
        self.with_value(op(self.value.clone(), rhs.value.clone()))
    }
}

impl<T: Int> fmt::Display for Residue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl<T: Int> Add for &Residue<T> {
    type Output = Residue<T>;
    fn add(self, rhs: Self) -> Residue<T> {
        self.combine(rhs, |a, b| a + b)
    }
}

impl<T: Int> Sub for &Residue<T> {
    type Output = Residue<T>;
    fn sub(self, rhs: Self) -> Residue<T> {
        self.combine(rhs, |a, b| a - b)
    }
}

impl<T: Int> Mul for &Residue<T> {
    type Output = Residue<T>;
    fn mul(self, rhs: Self) -> Residue<T> {
        self.combine(rhs, |a, b| a * b)
    }
}

impl<T: Int> Neg for &Residue<T> {
    type Output = Residue<T>;
    fn neg(self) -> Residue<T> {
        self.with_value(-self.value.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, Signed, Zero};
    use proptest::prelude::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn gcd_examples() {
        // 239915931 = 364613·658 + 577, 658 = 577 + 81, 577 = 7·81 + 10,
        // 81 = 8·10 + 1.
        assert_eq!(gcd(&658i64, &239915931), 1);
        assert_eq!(gcd(&0i64, &7), 7);
        assert_eq!(gcd(&12i64, &18), 6);
        assert_eq!(gcd(&0i64, &0), 0);
        assert_eq!(gcd(&-12i64, &18), 6);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(*mod_inverse(&1i64, &209).unwrap().value(), 1);
        assert_eq!(*mod_inverse(&2i64, &17).unwrap().value(), 9);
        assert_eq!(*mod_inverse(&6i64, &209).unwrap().value(), 35);
        assert!(matches!(mod_inverse(&11i64, &209), Err(Error::NotCoprime { .. })));
        assert!(matches!(mod_inverse(&3i64, &1), Err(Error::InvalidParameter(_))));
        assert_eq!(*mod_inverse(&-6i64, &209).unwrap().value(), 209 - 35);
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(*canonical(&-1i64, &7).unwrap().value(), 6);
        assert_eq!(*canonical(&7i64, &7).unwrap().value(), 0);
        assert_eq!(*canonical(&10i64, &7).unwrap().value(), 3);
    }

    #[test]
    fn residue_ops() {
        let a = Residue::new(big(200), big(209)).unwrap();
        let b = Residue::new(big(15), big(209)).unwrap();
        assert_eq!(*(&a + &b).value(), big(6));
        assert_eq!(*(&b - &a).value(), big(24));
        assert_eq!(*(&a * &b).value(), big(3000 % 209));
        assert_eq!(*(-&b).value(), big(194));
        assert_eq!(*a.square().value(), big(81));
    }

    #[test]
    #[should_panic(expected = "different moduli")]
    fn mixed_moduli_panic() {
        let _ = &Residue::new(1i64, 7).unwrap() + &Residue::new(1i64, 9).unwrap();
    }

    #[test]
    fn canonical_decimal_parsing() {
        assert_eq!(parse_canonical_decimal::<i64>("0"), Some(0));
        assert_eq!(parse_canonical_decimal::<i64>("209"), Some(209));
        for bad in ["", "00", "012", "+5", "-5", " 5", "5 ", "1e3"] {
            assert_eq!(parse_canonical_decimal::<i64>(bad), None, "{bad:?}");
        }
    }

    fn arb_big(bits: usize) -> impl Strategy<Value = BigInt> {
        (proptest::collection::vec(any::<u8>(), bits / 8), any::<bool>()).prop_map(|(bytes, neg)| {
            let v = BigInt::from_bytes_be(num_bigint::Sign::Plus, &bytes);
            if neg {
                -v
            } else {
                v
            }
        })
    }

    proptest! {
        #[test]
        fn inverse_matches_independent_extended_gcd(a in arb_big(256), n in arb_big(256)) {
            let n = n.abs() + big(2);
            let oracle = a.extended_gcd(&n);
            match mod_inverse(&a, &n) {
                Ok(inv) => {
                    prop_assert!(oracle.gcd.is_one());
                    prop_assert_eq!(inv.value().clone(), oracle.x.mod_floor(&n));
                    prop_assert!((&a * inv.value()).mod_floor(&n).is_one());
                }
                Err(Error::NotCoprime { .. }) => prop_assert!(!oracle.gcd.is_one()),
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }

        #[test]
        fn canonical_is_in_range_and_congruent(a in arb_big(256), n in arb_big(128)) {
            let n = n.abs() + big(2);
            let c = canonical(&a, &n).unwrap();
            prop_assert!(c.value() >= &big(0) && c.value() < &n);
            prop_assert!((c.value() - &a).is_multiple_of(&n));
        }

        #[test]
        fn gcd_commutes_and_divides(a in arb_big(256), b in arb_big(256)) {
            let g = gcd(&a, &b);
            prop_assert_eq!(&g, &gcd(&b, &a));
            prop_assert_eq!(&g, &a.gcd(&b));
            if !g.is_zero() {
                prop_assert!(a.is_multiple_of(&g) && b.is_multiple_of(&g));
            }
        }

        #[test]
        fn primitive_and_big_scalars_agree(a in -1_000_000i64..1_000_000, n in 2i64..1_000_000) {
            let small = mod_inverse(&a, &n).map(|r| r.into_value());
            let wide = mod_inverse(&big(a), &big(n)).map(|r| r.into_value());
            prop_assert_eq!(small.map(BigInt::from), wide);
        }
    }
}
