//! Ong-Schnorr-Shamir signing and verification.
//!
//! A signature on `M` with randomizer `r` is the pair
//! `s1 = 2⁻¹(M·r⁻¹ + r)`, `s2 = k·2⁻¹(M·r⁻¹ − r)` (mod n), and it verifies
//! when `s1² + h·s2² ≡ M (mod n)`.

use crate::error::{Error, Result};
use crate::keys::{PrivateKey, PublicKey};
use crate::modmath::{gcd, Residue};
use crate::rng::SeededRng;
use crate::scalar::Int;

/// Both components are canonical residues in `[0, n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignaturePair<T> {
    pub s1: T,
    pub s2: T,
}

/// How the randomizer is chosen when signing a byte string.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum RMode<T> {
    /// A fresh coprime `r` per byte.
    #[default]
    Fresh,
    /// One `r` for every byte. Equal bytes then get equal pairs, which leaks
    /// repetition in the plaintext.
    Fixed(T),
}

/// A message and one signature pair per byte.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedMessage<T> {
    pub message: Vec<u8>,
    pub pairs: Vec<SignaturePair<T>>,
}

pub(crate) fn half_terms<T: Int>(numerator: &Residue<T>, r: &Residue<T>, k: &Residue<T>) -> Result<SignaturePair<T>> {
    let two_inv = r.with_value(T::from_u8(2).unwrap()).inverse()?;
    let ratio = numerator * &r.inverse()?;
    let s1 = &two_inv * &(&ratio + r);
    let s2 = &(k * &two_inv) * &(&ratio - r);
    Ok(SignaturePair {
        s1: s1.into_value(),
        s2: s2.into_value(),
    })
}

pub fn sign_residue<T: Int>(m: &Residue<T>, key: &PrivateKey<T>, r: &T) -> Result<SignaturePair<T>> {
    let n = key.n();
    let r = Residue::new(r.clone(), n.clone())?;
    if !r.is_coprime() {
        return Err(Error::not_coprime("r"));
    }
    let m = Residue::new(m.value().clone(), n.clone())?;
    half_terms(&m, &r, key.k())
}

/// Rejection-samples `r` uniformly from `[2, n-1]` until `gcd(r, n) = 1`.
pub fn pick_r<T: Int>(n: &T, rng: &mut SeededRng) -> T {
    let low = T::from_u8(2).unwrap();
    loop {
        let r = T::sample_range(rng, &low, n);
        if gcd(&r, n).is_one() {
            return r;
        }
    }
}

/// `(s1² + h·s2²) mod n = M`, with both components required to be canonical.
pub fn verify_residue<T: Int>(m: &Residue<T>, sig: &SignaturePair<T>, key: &PublicKey<T>) -> bool {
    let n = key.n();
    if m.modulus() != n || !in_range(&sig.s1, n) || !in_range(&sig.s2, n) {
        return false;
    }
    let s1 = key.h().with_value(sig.s1.clone());
    let s2 = key.h().with_value(sig.s2.clone());
    let lhs = &s1.square() + &(key.h() * &s2.square());
    lhs == *m
}

fn in_range<T: Int>(v: &T, n: &T) -> bool {
    !v.is_negative() && v < n
}

/// Each byte is signed directly as a residue. Moduli at or below 255 reduce
/// some byte values, so byte signatures are only unambiguous for `n > 255`.
pub fn sign_bytes<T: Int>(
    msg: &[u8],
    key: &PrivateKey<T>,
    rng: &mut SeededRng,
    mode: &RMode<T>,
) -> Result<SignedMessage<T>> {
    let n = key.n();
    if let RMode::Fixed(r) = mode {
        if !gcd(r, n).is_one() {
            return Err(Error::not_coprime("fixed r"));
        }
    }
    let pairs = msg
        .iter()
        .map(|&byte| {
            let m = byte_residue(byte, n)?;
            let r = match mode {
                RMode::Fresh => pick_r(n, rng),
                RMode::Fixed(r) => r.clone(),
            };
            sign_residue(&m, key, &r)
        })
        .collect::<Result<_>>()?;
    Ok(SignedMessage {
        message: msg.to_vec(),
        pairs,
    })
}

pub(crate) fn byte_residue<T: Int>(byte: u8, n: &T) -> Result<Residue<T>> {
    Residue::new(T::from_u8(byte).unwrap(), n.clone())
}

/// Outcome of checking a signed message byte by byte.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageVerdict {
    /// One entry per position present in both the message and the pair list.
    pub per_byte: Vec<bool>,
    /// Set when the message and the pair list differ in length.
    pub length_mismatch: Option<(usize, usize)>,
}

impl MessageVerdict {
    pub fn is_valid(&self) -> bool {
        self.length_mismatch.is_none() && self.per_byte.iter().all(|&ok| ok)
    }
}

pub fn verify_bytes<T: Int>(signed: &SignedMessage<T>, key: &PublicKey<T>) -> MessageVerdict {
    verify_byte_pairs(&signed.message, &signed.pairs, key)
}

pub(crate) fn verify_byte_pairs<T: Int>(
    message: &[u8],
    pairs: &[SignaturePair<T>],
    key: &PublicKey<T>,
) -> MessageVerdict {
    let n = key.n();
    let per_byte = message
        .iter()
        .zip(pairs)
        .map(|(&byte, pair)| byte_residue(byte, n).is_ok_and(|m| verify_residue(&m, pair, key)))
        .collect();
    let (len, count) = (message.len(), pairs.len());
    MessageVerdict {
        per_byte,
        length_mismatch: (len != count).then_some((len, count)),
    }
}
