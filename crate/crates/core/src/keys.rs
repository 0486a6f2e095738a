//! Key material: the public modulus `n`, the secret `k` and the published
//! `h ≡ -k⁻² (mod n)`.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::modmath::{canonical, gcd, parse_canonical_decimal, random_probable_prime, Residue};
use crate::rng::SeededRng;
use crate::scalar::Int;

pub const MIN_MODULUS: u32 = 15;

const PUBLIC_HEADER: &str = "oss-key v1 public";
const PRIVATE_HEADER: &str = "oss-key v1 private";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey<T> {
    h: Residue<T>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivateKey<T> {
    k: Residue<T>,
    h: Residue<T>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair<T> {
    pub public: PublicKey<T>,
    pub private: PrivateKey<T>,
}

impl<T: Int> PublicKey<T> {
    /// Builds a key without checking it against any private half. `h` is
    /// reduced into `[0, n)`.
    pub fn from_raw_parts(n: T, h: T) -> Result<Self> {
        check_public_modulus(&n)?;
        Ok(PublicKey { h: Residue::new(h, n)? })
    }

    pub fn n(&self) -> &T {
        self.h.modulus()
    }

    pub fn h(&self) -> &Residue<T> {
        &self.h
    }

    pub fn to_key_file(&self) -> String {
        format!("{PUBLIC_HEADER}\nn {}\nh {}\n", self.n(), self.h)
    }

    pub fn from_key_file(text: &str) -> Result<Self> {
        match parse_key_file(text)? {
            KeyFile::Public(key) => Ok(key),
            KeyFile::Private(_) => Err(Error::Malformed("expected a public key file".into())),
        }
    }
}

impl<T: Int> PrivateKey<T> {
    /// Builds a key with no consistency checks beyond reduction mod `n`; see
    /// [`validate_keypair`] for the full invariant set.
    pub fn from_raw_parts(n: T, k: T, h: T) -> Result<Self> {
        Ok(PrivateKey {
            k: Residue::new(k, n.clone())?,
            h: Residue::new(h, n)?,
        })
    }

    pub fn n(&self) -> &T {
        self.k.modulus()
    }

    pub fn k(&self) -> &Residue<T> {
        &self.k
    }

    pub fn h(&self) -> &Residue<T> {
        &self.h
    }

    pub fn public(&self) -> PublicKey<T> {
        PublicKey { h: self.h.clone() }
    }

    pub fn to_key_file(&self) -> String {
        format!("{PRIVATE_HEADER}\nn {}\nh {}\nk {}\n", self.n(), self.h, self.k)
    }

    pub fn from_key_file(text: &str) -> Result<Self> {
        match parse_key_file(text)? {
            KeyFile::Private(key) => Ok(key),
            KeyFile::Public(_) => Err(Error::Malformed("expected a private key file".into())),
        }
    }
}

impl<T: Int> KeyPair<T> {
    pub fn n(&self) -> &T {
        self.public.n()
    }
}

impl<T: Int> From<PrivateKey<T>> for KeyPair<T> {
    fn from(private: PrivateKey<T>) -> Self {
        KeyPair {
            public: private.public(),
            private,
        }
    }
}

fn check_public_modulus<T: Int>(n: &T) -> Result<()> {
    if *n < T::from_u32(MIN_MODULUS).unwrap() {
        return Err(Error::InvalidParameter(format!(
            "modulus {n} is below the minimum of {MIN_MODULUS}"
        )));
    }
    if n.is_even() {
        return Err(Error::EvenModulus);
    }
    Ok(())
}

/// `h = -(k⁻¹)² mod n`, so that `h·k² ≡ -1 (mod n)`.
pub fn derive_h<T: Int>(k: &T, n: &T) -> Result<Residue<T>> {
    if n.is_even() {
        return Err(Error::EvenModulus);
    }
    let k_inv = canonical(k, n)?.inverse().map_err(|_| Error::not_coprime("k"))?;
    Ok(-&k_inv.square())
}

pub fn import_keys<T: Int>(n: T, k: T) -> Result<KeyPair<T>> {
    check_public_modulus(&n)?;
    let h = derive_h(&k, &n)?;
    let k = Residue::new(k, n)?;
    Ok(PrivateKey { k, h }.into())
}

/// `n = p·q` for two distinct probable primes of `⌈bits/2⌉` bits each, and a
/// `k_bits`-bit secret coprime to `n` (reduced mod `n` when it is wider).
pub fn keygen(bits: u64, k_bits: u64, rng: &mut SeededRng) -> Result<KeyPair<BigInt>> {
    if bits < 8 {
        return Err(Error::InvalidParameter(format!("modulus size {bits} is below 8 bits")));
    }
    if k_bits < 2 {
        return Err(Error::InvalidParameter(format!("secret size {k_bits} is below 2 bits")));
    }
    let half = bits.div_ceil(2);
    let p = random_probable_prime(half, rng)?;
    let q = loop {
        let q = random_probable_prime(half, rng)?;
        if q != p {
            break q;
        }
    };
    let n = p * q;

    let top = BigInt::one() << (k_bits - 1);
    let k = loop {
        let k = BigInt::sample_range(rng, &top, &(&top << 1)) % &n;
        if gcd(&k, &n).is_one() {
            break k;
        }
    };
    import_keys(n, k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyDefect {
    ModulusTooSmall,
    EvenModulus,
    ModulusMismatch,
    PublicHMismatch,
    KNotCoprime,
    HNotNegInverseSquare,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyValidation {
    pub defects: Vec<KeyDefect>,
}

impl KeyValidation {
    pub fn is_valid(&self) -> bool {
        self.defects.is_empty()
    }
}

/// Checks every key invariant, including `h·k² mod n = n - 1`.
pub fn validate_keypair<T: Int>(kp: &KeyPair<T>) -> KeyValidation {
    let mut defects = Vec::new();
    let n = kp.private.n();
    if *n < T::from_u32(MIN_MODULUS).unwrap() {
        defects.push(KeyDefect::ModulusTooSmall);
    }
    if n.is_even() {
        defects.push(KeyDefect::EvenModulus);
    }
    if kp.public.n() != n {
        defects.push(KeyDefect::ModulusMismatch);
    } else if kp.public.h() != kp.private.h() {
        defects.push(KeyDefect::PublicHMismatch);
    }
    if !kp.private.k().is_coprime() {
        defects.push(KeyDefect::KNotCoprime);
    }
    let product = kp.private.h() * &kp.private.k().square();
    if *product.value() != n.clone() - T::one() {
        defects.push(KeyDefect::HNotNegInverseSquare);
    }
    KeyValidation { defects }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KeyFile<T> {
    Public(PublicKey<T>),
    Private(PrivateKey<T>),
}

impl<T: Int> KeyFile<T> {
    pub fn public(&self) -> PublicKey<T> {
        match self {
            KeyFile::Public(key) => key.clone(),
            KeyFile::Private(key) => key.public(),
        }
    }
}

/// Parses either key file flavour. Rejects missing or extra lines, non-LF
/// terminators, non-canonical decimals and, for private keys, any `h` that
/// does not match `k`.
pub fn parse_key_file<T: Int>(text: &str) -> Result<KeyFile<T>> {
    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| Error::Malformed("key file must end with a newline".into()))?;
    let lines: Vec<&str> = body.split('\n').collect();
    let private = match lines[0] {
        PUBLIC_HEADER => false,
        PRIVATE_HEADER => true,
        other => return Err(Error::UnsupportedVersion(other.to_string())),
    };
    let expected = if private { 4 } else { 3 };
    if lines.len() != expected {
        return Err(Error::Malformed(format!(
            "key file has {} lines, expected {expected}",
            lines.len()
        )));
    }
    let field = |line: &str, name: &str| -> Result<T> {
        let value = line
            .strip_prefix(name)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| Error::Malformed(format!("expected `{name} <decimal>`, got {line:?}")))?;
        parse_canonical_decimal(value)
            .ok_or_else(|| Error::Malformed(format!("non-canonical decimal for {name}: {value:?}")))
    };
    let n = field(lines[1], "n")?;
    let h = field(lines[2], "h")?;
    if h >= n {
        return Err(Error::Malformed("h is not reduced mod n".into()));
    }
    if !private {
        return Ok(KeyFile::Public(PublicKey::from_raw_parts(n, h)?));
    }
    let k = field(lines[3], "k")?;
    if k >= n {
        return Err(Error::Malformed("k is not reduced mod n".into()));
    }
    let key = PrivateKey::from_raw_parts(n, k, h)?;
    let validation = validate_keypair(&KeyPair::from(key.clone()));
    if !validation.is_valid() {
        return Err(Error::InvalidKey(format!("{:?}", validation.defects)));
    }
    Ok(KeyFile::Private(key))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    #[test]
    fn derive_h_small_modulus() {
        // 6⁻¹ = 35, 35² = 1225 ≡ 180, -180 ≡ 29 (mod 209)
        assert_eq!(*derive_h(&6i64, &209).unwrap().value(), 29);
        assert_eq!((29 * 36) % 209, 208);
        assert_eq!(*derive_h(&1i64, &209).unwrap().value(), 208);
    }

    #[test]
    fn derive_h_walkthrough_modulus() {
        let n = BigInt::from(239915931u64);
        let h = derive_h(&BigInt::from(658), &n).unwrap();
        let check = (h.value() * BigInt::from(432964)).mod_floor(&n);
        assert_eq!(check, &n - 1);
    }

    #[test]
    fn derive_h_errors() {
        assert_eq!(derive_h(&3i64, &210), Err(Error::EvenModulus));
        assert!(matches!(derive_h(&11i64, &209), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn import_examples() {
        let kp = import_keys(209i64, 6).unwrap();
        assert_eq!(*kp.public.h().value(), 29);
        assert!(validate_keypair(&kp).is_valid());

        let kp = import_keys(BigInt::from(239915931u64), BigInt::from(658)).unwrap();
        assert!(validate_keypair(&kp).is_valid());

        assert_eq!(import_keys(210i64, 3), Err(Error::EvenModulus));
        assert!(matches!(import_keys(209i64, 19), Err(Error::NotCoprime { .. })));
        assert!(matches!(import_keys(9i64, 2), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn validation_catches_corrupted_h() {
        let kp: KeyPair<i64> = PrivateKey::from_raw_parts(209, 6, 30).unwrap().into();
        // 30·36 = 1080 ≡ 35, not -1
        let v = validate_keypair(&kp);
        assert_eq!(v.defects, vec![KeyDefect::HNotNegInverseSquare]);

        let kp: KeyPair<i64> = PrivateKey::from_raw_parts(209, 1, 208).unwrap().into();
        assert!(validate_keypair(&kp).is_valid());

        let mut kp = import_keys(209i64, 6).unwrap();
        kp.public = PublicKey::from_raw_parts(209, 28).unwrap();
        assert_eq!(validate_keypair(&kp).defects, vec![KeyDefect::PublicHMismatch]);
    }

    #[test]
    fn keygen_properties() {
        let kp = keygen(64, 16, &mut SeededRng::from_seed(1)).unwrap();
        assert!(validate_keypair(&kp).is_valid());
        assert!(kp.n().is_odd());

        let again = keygen(64, 16, &mut SeededRng::from_seed(1)).unwrap();
        assert_eq!(kp.private.to_key_file(), again.private.to_key_file());
        assert_eq!(kp.public.to_key_file(), again.public.to_key_file());
    }

    #[test]
    fn keygen_tiny_modulus_has_two_prime_factors() {
        for seed in 0..10 {
            let kp = keygen(8, 2, &mut SeededRng::from_seed(seed)).unwrap();
            let n: u64 = kp.n().try_into().unwrap();
            let factors: Vec<u64> = (2..n)
                .filter(|d| n.is_multiple_of(*d) && (2..*d).all(|e| !(*d).is_multiple_of(e)))
                .collect();
            assert_eq!(factors.len(), 2, "n = {n}");
            assert_eq!(factors[0] * factors[1], n);
            assert!(validate_keypair(&kp).is_valid());
        }
    }

    #[test]
    fn keygen_rejects_small_sizes() {
        let mut rng = SeededRng::from_seed(0);
        assert!(matches!(keygen(4, 16, &mut rng), Err(Error::InvalidParameter(_))));
        assert!(matches!(keygen(64, 1, &mut rng), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn key_file_layout() {
        let kp = import_keys(209i64, 6).unwrap();
        assert_eq!(kp.public.to_key_file(), "oss-key v1 public\nn 209\nh 29\n");
        assert_eq!(kp.private.to_key_file(), "oss-key v1 private\nn 209\nh 29\nk 6\n");
        assert_eq!(
            PublicKey::<i64>::from_key_file(&kp.public.to_key_file()).unwrap(),
            kp.public
        );
        assert_eq!(
            PrivateKey::<i64>::from_key_file(&kp.private.to_key_file()).unwrap(),
            kp.private
        );
        let as_public = parse_key_file::<i64>(&kp.private.to_key_file()).unwrap().public();
        assert_eq!(as_public, kp.public);
    }

    #[test]
    fn key_file_rejections() {
        let cases = [
            "oss-key v1 public\nn 209\nh 29",
            "oss-key v1 public\nn 209\nh 29\n\n",
            "oss-key v1 public\nn 209\nh 29\nextra\n",
            "oss-key v1 public\nn 209\n",
            "oss-key v1 public\nn 209\nh 229\n",
            "oss-key v1 public\nn 209\nh 029\n",
            "oss-key v1 public\nn 209\nh -1\n",
            "oss-key v1 public\nn  209\nh 29\n",
            "oss-key v1 public\r\nn 209\r\nh 29\r\n",
            "oss-key v1 private\nn 209\nh 30\nk 6\n",
            "oss-key v1 private\nn 209\nh 29\n",
            "oss-key v2 public\nn 209\nh 29\n",
            "oss-key v1 public\nn 210\nh 29\n",
        ];
        for text in cases {
            assert!(parse_key_file::<i64>(text).is_err(), "{text:?}");
        }
    }
}
