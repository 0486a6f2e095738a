//! The subliminal channel carried by Ong-Schnorr-Shamir signatures.
//!
//! The secret `w` takes the place of the signing randomizer and the innocuous
//! cover `w′` takes the place of the message. Anyone holding the public key
//! sees a valid signature on `w′`; the holder of `k` recovers
//! `w = w′ / (s1 + k⁻¹·s2)`.
//!
//! There is no other randomness: the same (secret, cover) characters always
//! produce the same pair.

use crate::error::{Error, Result};
use crate::keys::{PrivateKey, PublicKey};
use crate::modmath::Residue;
use crate::scalar::Int;
use crate::sigscheme::{byte_residue, half_terms, verify_byte_pairs, verify_residue, MessageVerdict, SignaturePair};

pub const DEFAULT_PAD_BYTE: u8 = b' ';

/// A cover text with one embedded pair per byte.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CovertBundle<T> {
    pub cover: Vec<u8>,
    pub pairs: Vec<SignaturePair<T>>,
    pub pad_byte: u8,
}

pub fn embed<T: Int>(w: &Residue<T>, w_prime: &Residue<T>, key: &PrivateKey<T>) -> Result<SignaturePair<T>> {
    embed_labelled(w, w_prime, key, "")
}

fn embed_labelled<T: Int>(
    w: &Residue<T>,
    w_prime: &Residue<T>,
    key: &PrivateKey<T>,
    at: &str,
) -> Result<SignaturePair<T>> {
    let n = key.n();
    let w = Residue::new(w.value().clone(), n.clone())?;
    let w_prime = Residue::new(w_prime.value().clone(), n.clone())?;
    if !w.is_coprime() {
        return Err(Error::not_coprime(format!("w{at}")));
    }
    if !w_prime.is_coprime() {
        return Err(Error::not_coprime(format!("w′{at}")));
    }
    half_terms(&w_prime, &w, key.k())
}

/// Cover verification is ordinary signature verification with `M := w′`.
pub fn verify_cover<T: Int>(w_prime: &Residue<T>, sig: &SignaturePair<T>, key: &PublicKey<T>) -> bool {
    verify_residue(w_prime, sig, key)
}

pub fn extract<T: Int>(w_prime: &Residue<T>, sig: &SignaturePair<T>, key: &PrivateKey<T>) -> Result<Residue<T>> {
    let n = key.n();
    let w_prime = Residue::new(w_prime.value().clone(), n.clone())?;
    let s1 = w_prime.with_value(sig.s1.clone());
    let s2 = w_prime.with_value(sig.s2.clone());
    let k_inv = key.k().inverse()?;
    let denominator = &s1 + &(&k_inv * &s2);
    let inv = denominator.inverse().map_err(|_| Error::not_coprime("s1 + k⁻¹·s2"))?;
    Ok(&w_prime * &inv)
}

/// Right-pads `secret` with [`DEFAULT_PAD_BYTE`] to the cover's length and
/// embeds it one byte per cover byte.
pub fn covert_embed_text<T: Int>(secret: &[u8], cover: &[u8], key: &PrivateKey<T>) -> Result<CovertBundle<T>> {
    if secret.len() > cover.len() {
        return Err(Error::CoverTooShort {
            secret: secret.len(),
            cover: cover.len(),
        });
    }
    let n = key.n();
    let padded = secret
        .iter()
        .copied()
        .chain(std::iter::repeat(DEFAULT_PAD_BYTE))
        .take(cover.len());
    let pairs = padded
        .zip(cover)
        .enumerate()
        .map(|(i, (w, &w_prime))| {
            embed_labelled(
                &byte_residue(w, n)?,
                &byte_residue(w_prime, n)?,
                key,
                &format!(" at position {i}"),
            )
        })
        .collect::<Result<_>>()?;
    Ok(CovertBundle {
        cover: cover.to_vec(),
        pairs,
        pad_byte: DEFAULT_PAD_BYTE,
    })
}

/// Recovers the secret, then strips trailing pad bytes. A secret that itself
/// ends in the pad byte loses those bytes.
pub fn covert_extract_text<T: Int>(bundle: &CovertBundle<T>, key: &PrivateKey<T>) -> Result<Vec<u8>> {
    if bundle.cover.len() != bundle.pairs.len() {
        return Err(Error::LengthMismatch {
            expected: bundle.cover.len(),
            found: bundle.pairs.len(),
        });
    }
    let n = key.n();
    let mut secret = bundle
        .cover
        .iter()
        .zip(&bundle.pairs)
        .enumerate()
        .map(|(i, (&w_prime, pair))| {
            let w = extract(&byte_residue(w_prime, n)?, pair, key).map_err(|e| match e {
                Error::NotCoprime { what } => Error::not_coprime(format!("{what} at position {i}")),
                other => other,
            })?;
            w.value().to_u8().ok_or_else(|| Error::ExtractOutOfRange {
                position: i,
                value: w.value().to_string(),
            })
        })
        .collect::<Result<Vec<u8>>>()?;
    while secret.last() == Some(&bundle.pad_byte) {
        secret.pop();
    }
    Ok(secret)
}

/// What the warden can check: every pair is a valid signature on its cover byte.
pub fn verify_bundle<T: Int>(bundle: &CovertBundle<T>, key: &PublicKey<T>) -> MessageVerdict {
    verify_byte_pairs(&bundle.cover, &bundle.pairs, key)
}
