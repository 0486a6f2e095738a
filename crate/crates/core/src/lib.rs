//! Ong-Schnorr-Shamir signatures over ℤ_n and the subliminal channel they
//! carry, with an exact-rational oracle for published worked examples and a
//! deterministic warden simulator.
//!
//! The arithmetic is generic over the integer scalar ([`Int`]). The aliases
//! below fix it to [`num_bigint::BigInt`], which is what the CLI, the
//! simulator and key generation use. `i64`/`i128` instantiations exist for
//! small hand-checkable moduli.
//!
//! The scheme is broken (it admits efficient forgeries); this crate is for
//! study and reproduction, not for protecting anything.

pub mod codec;
pub mod error;
pub mod keys;
pub mod modmath;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod sigscheme;
pub mod sim;
pub mod subliminal;

pub use error::{Error, Result};
pub use num_bigint::BigInt;
pub use oracle::rational::Rational;
pub use oracle::Scheme;
pub use rng::SeededRng;
pub use scalar::Int;

pub type Residue = modmath::Residue<BigInt>;
pub type PublicKey = keys::PublicKey<BigInt>;
pub type PrivateKey = keys::PrivateKey<BigInt>;
pub type KeyPair = keys::KeyPair<BigInt>;
pub type KeyFile = keys::KeyFile<BigInt>;
pub type SignaturePair = sigscheme::SignaturePair<BigInt>;
pub type SignedMessage = sigscheme::SignedMessage<BigInt>;
pub type RMode = sigscheme::RMode<BigInt>;
pub type CovertBundle = subliminal::CovertBundle<BigInt>;
