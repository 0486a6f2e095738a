mod common;

use common::{golden, golden_text};
use num_bigint::BigInt;
use oss_core::codec::{
    format_block, parse_block, read_covert_bundle, read_signed_message, write_covert_bundle, write_signed_message,
};
use oss_core::keys::{import_keys, keygen, parse_key_file, KeyFile};
use oss_core::sigscheme::{sign_bytes, verify_bytes};
use oss_core::subliminal::{covert_extract_text, embed, extract, verify_bundle, verify_cover, CovertBundle};
use oss_core::{RMode, Residue, SeededRng, SignaturePair, SignedMessage};
use rand::Rng;

fn n209() -> oss_core::KeyPair {
    import_keys(BigInt::from(209), BigInt::from(6)).unwrap()
}

fn residue(v: i64) -> Residue {
    Residue::new(BigInt::from(v), BigInt::from(209)).unwrap()
}

fn random_bytes(rng: &mut SeededRng, max_len: usize) -> Vec<u8> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| rng.gen()).collect()
}

fn random_pair(rng: &mut SeededRng, n: &BigInt) -> SignaturePair {
    SignaturePair {
        s1: rng.gen_range(BigInt::from(0)..n.clone()),
        s2: rng.gen_range(BigInt::from(0)..n.clone()),
    }
}

#[test]
fn two_hundred_random_artifacts_roundtrip_byte_exact() {
    let mut rng = SeededRng::from_seed(0xC0DEC);
    let keys: Vec<_> = [16u64, 40, 64, 96, 128]
        .iter()
        .map(|&bits| keygen(bits, bits / 2, &mut rng).unwrap())
        .collect();
    for i in 0..200 {
        let kp = &keys[i % keys.len()];
        let n = kp.n();

        let public = kp.public.to_key_file();
        let private = kp.private.to_key_file();
        assert_eq!(
            parse_key_file::<BigInt>(&public).unwrap(),
            KeyFile::Public(kp.public.clone())
        );
        assert_eq!(
            parse_key_file::<BigInt>(&private).unwrap(),
            KeyFile::Private(kp.private.clone())
        );
        assert_eq!(kp.public.to_key_file(), public);

        let arbitrary: Vec<SignaturePair> = (0..rng.gen_range(0..8)).map(|_| random_pair(&mut rng, n)).collect();
        let block = format_block(&arbitrary);
        assert_eq!(parse_block::<BigInt>(&block).unwrap(), arbitrary);

        let message = random_bytes(&mut rng, 40);
        let signed = sign_bytes(&message, &kp.private, &mut rng, &RMode::Fresh).unwrap();
        let bytes = write_signed_message(&signed, n);
        let (n_back, back) = read_signed_message::<BigInt>(&bytes).unwrap();
        assert_eq!((&n_back, &back), (n, &signed), "artifact {i}");
        assert_eq!(write_signed_message(&back, &n_back), bytes);

        let cover = random_bytes(&mut rng, 40);
        let pairs = cover.iter().map(|_| random_pair(&mut rng, n)).collect();
        let bundle = CovertBundle {
            cover,
            pairs,
            pad_byte: rng.gen(),
        };
        let bytes = write_covert_bundle(&bundle, n);
        let (n_back, back) = read_covert_bundle::<BigInt>(&bytes).unwrap();
        assert_eq!((&n_back, &back), (n, &bundle), "artifact {i}");
        assert_eq!(write_covert_bundle(&back, &n_back), bytes);
    }
}

#[test]
fn small_modulus_key_files_are_golden() {
    let kp = n209();
    golden("n209.pub", kp.public.to_key_file().as_bytes());
    golden("n209.key", kp.private.to_key_file().as_bytes());
}

#[test]
fn small_modulus_signature_survives_the_file_format() {
    let kp = n209();
    let signed = sign_bytes(
        &[10],
        &kp.private,
        &mut SeededRng::from_seed(0),
        &RMode::Fixed(BigInt::from(3)),
    )
    .unwrap();
    assert_eq!(
        signed.pairs,
        vec![SignaturePair {
            s1: BigInt::from(38),
            s2: BigInt::from(1)
        }]
    );
    golden("n209-sign-10.msg", &write_signed_message(&signed, kp.n()));

    let KeyFile::Public(public) =
        parse_key_file::<BigInt>(std::str::from_utf8(&golden_text("n209.pub")).unwrap()).unwrap()
    else {
        panic!("public key file parsed as private")
    };
    let (n, back) = read_signed_message::<BigInt>(&golden_text("n209-sign-10.msg")).unwrap();
    assert_eq!(&n, public.n());
    assert!(verify_bytes(&back, &public).is_valid());
    let edited = SignedMessage {
        message: vec![11],
        pairs: back.pairs,
    };
    assert!(!verify_bytes(&edited, &public).is_valid());
}

#[test]
fn small_modulus_covert_pair_survives_the_file_format() {
    let kp = n209();
    let sig = embed(&residue(10), &residue(7), &kp.private).unwrap();
    assert_eq!(
        sig,
        SignaturePair {
            s1: BigInt::from(183),
            s2: BigInt::from(202)
        }
    );
    let bundle = CovertBundle {
        cover: vec![7],
        pairs: vec![sig],
        pad_byte: b' ',
    };
    golden("n209-embed-10-under-7.covert", &write_covert_bundle(&bundle, kp.n()));

    let KeyFile::Private(private) =
        parse_key_file::<BigInt>(std::str::from_utf8(&golden_text("n209.key")).unwrap()).unwrap()
    else {
        panic!("private key file parsed as public")
    };
    let (_, back) = read_covert_bundle::<BigInt>(&golden_text("n209-embed-10-under-7.covert")).unwrap();
    assert!(verify_bundle(&back, &private.public()).is_valid());
    assert!(verify_cover(&residue(7), &back.pairs[0], &private.public()));
    assert_eq!(extract(&residue(7), &back.pairs[0], &private).unwrap(), residue(10));
    assert_eq!(covert_extract_text(&back, &private).unwrap(), vec![10]);
}

#[test]
fn text_bundle_is_golden() {
    let kp = import_keys(BigInt::from(17921593), BigInt::from(421)).unwrap();
    let bundle = oss_core::subliminal::covert_embed_text(b"Robbi", b"Janner", &kp.private).unwrap();
    golden("janner.covert", &write_covert_bundle(&bundle, kp.n()));
    let (_, back) = read_covert_bundle::<BigInt>(&golden_text("janner.covert")).unwrap();
    assert_eq!(covert_extract_text(&back, &kp.private).unwrap(), b"Robbi");
}
