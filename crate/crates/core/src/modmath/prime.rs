use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};

pub const MILLER_RABIN_ROUNDS: usize = 40;

/// All primes below 1000, used for trial division ahead of Miller-Rabin.
pub const SMALL_PRIMES: [u32; 168] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239,
    241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311, 313, 317, 331, 337, 347, 349, 353, 359, 367, 373, 379,
    383, 389, 397, 401, 409, 419, 421, 431, 433, 439, 443, 449, 457, 461, 463, 467, 479, 487, 491, 499, 503, 509, 521,
    523, 541, 547, 557, 563, 569, 571, 577, 587, 593, 599, 601, 607, 613, 617, 619, 631, 641, 643, 647, 653, 659, 661,
    673, 677, 683, 691, 701, 709, 719, 727, 733, 739, 743, 751, 757, 761, 769, 773, 787, 797, 809, 811, 821, 823, 827,
    829, 839, 853, 857, 859, 863, 877, 881, 883, 887, 907, 911, 919, 929, 937, 941, 947, 953, 967, 971, 977, 983, 991,
    997,
];

/// Trial division by the primes below 1000, then `MILLER_RABIN_ROUNDS` rounds
/// with bases drawn from `rng`.
pub fn is_probable_prime<R: Rng + ?Sized>(candidate: &BigInt, rng: &mut R) -> bool {
    if candidate < &BigInt::from(2) {
        return false;
    }
    for &p in SMALL_PRIMES.iter() {
        let p = BigInt::from(p);
        if candidate == &p {
            return true;
        }
        if candidate.is_multiple_of(&p) {
            return false;
        }
    }

    let one = BigInt::one();
    let minus_one = candidate - &one;
    let twos = minus_one.trailing_zeros().unwrap_or(0);
    let odd_part = &minus_one >> twos;
    let two = BigInt::from(2);

    'witness: for _ in 0..MILLER_RABIN_ROUNDS {
        let base = rng.gen_bigint_range(&two, &minus_one);
        let mut x = base.modpow(&odd_part, candidate);
        if x == one || x == minus_one {
            continue;
        }
        for _ in 1..twos {
            x = x.modpow(&two, candidate);
            if x == minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// An odd probable prime with exactly `bits` bits.
pub fn random_probable_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Result<BigInt> {
    if bits < 2 {
        return Err(Error::InvalidParameter(format!(
            "a prime needs at least 2 bits, got {bits}"
        )));
    }
    let top = BigInt::one() << (bits - 1);
    loop {
        let mut candidate = rng.gen_bigint_range(&BigInt::zero(), &top) + &top;
        candidate |= BigInt::one();
        if is_probable_prime(&candidate, rng) {
            return Ok(candidate);
        }
    }
}
