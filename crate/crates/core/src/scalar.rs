//! The integer scalar every residue computation is generic over.
//!
//! [`num_bigint::BigInt`] is the production instantiation. `i64` and `i128`
//! are usable for moduli small enough that a product of two residues does not
//! overflow, which keeps hand-checked examples cheap to run.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use rand::Rng;

pub trait Int:
    Integer + Signed + Clone + Debug + Display + FromStr + FromPrimitive + ToPrimitive + Send + Sync
{
    /// Number of significant bits in the magnitude; zero for zero.
    fn bit_length(&self) -> u64;

    /// Uniform draw from `[low, high)`. Panics when the range is empty.
    fn sample_range<R: Rng + ?Sized>(rng: &mut R, low: &Self, high: &Self) -> Self;
}

impl Int for BigInt {
    fn bit_length(&self) -> u64 {
        self.bits()
    }

    fn sample_range<R: Rng + ?Sized>(rng: &mut R, low: &Self, high: &Self) -> Self {
        rng.gen_bigint_range(low, high)
    }
}

macro_rules! impl_int_for_primitive {
    ($($t:ty),*) => {$(
        impl Int for $t {
            fn bit_length(&self) -> u64 {
                (<$t>::BITS - self.unsigned_abs().leading_zeros()) as u64
            }

            fn sample_range<R: Rng + ?Sized>(rng: &mut R, low: &Self, high: &Self) -> Self {
                rng.gen_range(*low..*high)
            }
        }
    )*};
}

impl_int_for_primitive!(i64, i128);
