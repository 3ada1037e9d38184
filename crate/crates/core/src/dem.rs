//! One-time data encapsulation: a one-time pad and an AES-128-CTR keystream
//! variant behind one interface.
//!
//! Wire framing is `tag (1 byte) ‖ nonce (12 bytes, stream only) ‖ payload`,
//! with the payload holding the packed ciphertext bits and zero padding. The
//! bit length of the payload is not framed; callers supply it when parsing.

use aes::Aes128;
use ctr::cipher::{KeyIvInit, StreamCipher};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;

pub const NONCE_LEN: usize = 12;
pub const STREAM_KEY_BITS: usize = 128;

const TAG_OTP: u8 = 0x01;
const TAG_STREAM: u8 = 0x02;

type Aes128Ctr = ctr::Ctr32BE<Aes128>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DemError {
    #[error("one-time pad needs {need} key bits, key has {have}")]
    KeyTooShort { need: usize, have: usize },
    #[error("stream key has {0} bits; at most {STREAM_KEY_BITS} are supported")]
    KeyTooLong(usize),
    #[error("key length must be at least 1")]
    EmptyKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemVariant {
    Otp,
    Stream,
}

impl DemVariant {
    pub fn name(self) -> &'static str {
        match self {
            Self::Otp => "otp",
            Self::Stream => "stream",
        }
    }

    fn tag(self) -> u8 {
        match self {
            Self::Otp => TAG_OTP,
            Self::Stream => TAG_STREAM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DemKey(pub BitString);

impl DemKey {
    pub fn bits(&self) -> &BitString {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemCiphertext {
    pub variant: DemVariant,
    pub nonce: Option<[u8; NONCE_LEN]>,
    pub payload: BitString,
}

impl DemCiphertext {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![self.variant.tag()];
        if let Some(nonce) = &self.nonce {
            out.extend_from_slice(nonce);
        }
        out.extend_from_slice(&self.payload.to_bytes());
        out
    }

    /// Parses a framed ciphertext whose payload holds `payload_bits` bits.
    /// `None` on an unknown tag or a truncated/oversized frame.
    pub fn from_bytes(bytes: &[u8], payload_bits: usize) -> Option<Self> {
        let (&tag, rest) = bytes.split_first()?;
        let (variant, nonce, body) = match tag {
            TAG_OTP => (DemVariant::Otp, None, rest),
            TAG_STREAM => {
                if rest.len() < NONCE_LEN {
                    return None;
                }
                let (n, body) = rest.split_at(NONCE_LEN);
                (DemVariant::Stream, Some(n.try_into().ok()?), body)
            }
            _ => return None,
        };
        if body.len() != payload_bits.div_ceil(8) {
            return None;
        }
        Some(Self {
            variant,
            nonce,
            payload: BitString::from_bytes(body, payload_bits).ok()?,
        })
    }
}

pub fn gen<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<DemKey, DemError> {
    if len == 0 {
        return Err(DemError::EmptyKey);
    }
    Ok(DemKey(BitString::random(len, rng)))
}

pub fn encap<R: Rng + ?Sized>(
    variant: DemVariant,
    key: &DemKey,
    message: &BitString,
    rng: &mut R,
) -> Result<DemCiphertext, DemError> {
    match variant {
        DemVariant::Otp => encap_otp(key, message),
        DemVariant::Stream => {
            let mut nonce = [0u8; NONCE_LEN];
            rng.fill(&mut nonce);
            encap_stream(key, message, nonce)
        }
    }
}

fn encap_otp(key: &DemKey, message: &BitString) -> Result<DemCiphertext, DemError> {
    if message.len() > key.len() {
        return Err(DemError::KeyTooShort {
            need: message.len(),
            have: key.len(),
        });
    }
    let pad = key.0.slice(0..message.len());
    Ok(DemCiphertext {
        variant: DemVariant::Otp,
        nonce: None,
        payload: message.xor(&pad).expect("equal lengths"),
    })
}

pub fn encap_stream(
    key: &DemKey,
    message: &BitString,
    nonce: [u8; NONCE_LEN],
) -> Result<DemCiphertext, DemError> {
    let stream = keystream_bits(key, &nonce, message.len())?;
    Ok(DemCiphertext {
        variant: DemVariant::Stream,
        nonce: Some(nonce),
        payload: message.xor(&stream).expect("equal lengths"),
    })
}

/// `None` is the rejection outcome.
pub fn decap(key: &DemKey, ct: &DemCiphertext) -> Option<BitString> {
    match (ct.variant, ct.nonce) {
        (DemVariant::Otp, None) => {
            let pad = (ct.payload.len() <= key.len()).then(|| key.0.slice(0..ct.payload.len()))?;
            ct.payload.xor(&pad).ok()
        }
        (DemVariant::Stream, Some(nonce)) => {
            let stream = keystream_bits(key, &nonce, ct.payload.len()).ok()?;
            ct.payload.xor(&stream).ok()
        }
        _ => None,
    }
}

/// Decapsulates straight from framed bytes.
pub fn decap_bytes(key: &DemKey, bytes: &[u8], payload_bits: usize) -> Option<BitString> {
    decap(key, &DemCiphertext::from_bytes(bytes, payload_bits)?)
}

fn stream_key_bytes(key: &DemKey) -> Result<[u8; 16], DemError> {
    if key.is_empty() {
        return Err(DemError::EmptyKey);
    }
    if key.len() > STREAM_KEY_BITS {
        return Err(DemError::KeyTooLong(key.len()));
    }
    let mut out = [0u8; 16];
    let packed = key.0.to_bytes();
    out[..packed.len()].copy_from_slice(&packed);
    Ok(out)
}

fn keystream(key: &[u8; 16], iv: &[u8; 16], len: usize) -> Vec<u8> {
    let mut buf = vec![0u8; len];
    Aes128Ctr::new(key.into(), iv.into()).apply_keystream(&mut buf);
    buf
}

fn keystream_bits(
    key: &DemKey,
    nonce: &[u8; NONCE_LEN],
    bits: usize,
) -> Result<BitString, DemError> {
    let mut iv = [0u8; 16];
    iv[..NONCE_LEN].copy_from_slice(nonce);
    let bytes = keystream(&stream_key_bytes(key)?, &iv, bits.div_ceil(8));
    Ok(BitString::from_bytes(&bytes, bits).expect("enough bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashSet;

    fn hex(s: &str) -> Vec<u8> {
        (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
            .collect()
    }

    #[test]
    fn aes_ctr_matches_sp800_38a() {
        // F.5.1 CTR-AES128.Encrypt
        let key: [u8; 16] = hex("2b7e151628aed2a6abf7158809cf4f3c").try_into().unwrap();
        let iv: [u8; 16] = hex("f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff").try_into().unwrap();
        let pt = hex(concat!(
            "6bc1bee22e409f96e93d7e117393172a",
            "ae2d8a571e03ac9c9eb76fac45af8e51",
            "30c81c46a35ce411e5fbc1191a0a52ef",
            "f69f2445df4f9b17ad2b417be66c3710"
        ));
        let ct = hex(concat!(
            "874d6191b620e3261bef6864990db6ce",
            "9806f66b7970fdff8617187bb9fffdff",
            "5ae4df3edbd5d35e5b4f09020db03eab",
            "1e031dda2fbe03d1792170a0f3009cee"
        ));
        let ks = keystream(&key, &iv, pt.len());
        let got: Vec<u8> = pt.iter().zip(&ks).map(|(a, b)| a ^ b).collect();
        assert_eq!(got, ct);
    }

    #[test]
    fn gen_shapes_and_replay() {
        let k = gen(8, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        assert_eq!(k.len(), 8);
        assert_eq!(k, gen(8, &mut ChaCha20Rng::seed_from_u64(1)).unwrap());
        assert_eq!(gen(0, &mut ChaCha20Rng::seed_from_u64(1)), Err(DemError::EmptyKey));
    }

    #[test]
    fn key_bits_are_balanced() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let keys = 100_000;
        let ones: usize = (0..keys).map(|_| gen(8, &mut rng).unwrap().0.weight()).sum();
        let total = (8 * keys) as f64;
        assert!((ones as f64 / total - 0.5).abs() <= 3.0 * (0.25 / total).sqrt());
    }

    #[test]
    fn otp_zero_key_is_identity() {
        let m: BitString = "1011001".parse().unwrap();
        let ct = encap(DemVariant::Otp, &DemKey(BitString::zeros(8)), &m, &mut ChaCha20Rng::seed_from_u64(0)).unwrap();
        assert_eq!(ct.payload, m);
    }

    #[test]
    fn otp_rejects_short_key() {
        let m = BitString::zeros(9);
        assert_eq!(
            encap(DemVariant::Otp, &DemKey(BitString::zeros(8)), &m, &mut ChaCha20Rng::seed_from_u64(0)),
            Err(DemError::KeyTooShort { need: 9, have: 8 })
        );
    }

    #[test]
    fn exhaustive_correctness_up_to_eight_bits() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for len in 1..=8usize {
            for mv in 0..1u64 << len {
                let m = BitString::from_u64(mv, len);
                let key = gen(8, &mut rng).unwrap();
                for variant in [DemVariant::Otp, DemVariant::Stream] {
                    let ct = encap(variant, &key, &m, &mut rng).unwrap();
                    assert_eq!(decap(&key, &ct), Some(m.clone()));
                    assert_eq!(decap_bytes(&key, &ct.to_bytes(), len), Some(m.clone()));
                }
            }
        }
    }

    #[test]
    fn otp_exhaustive_two_bit_roundtrip() {
        for kv in 0..4 {
            for mv in 0..4 {
                let (k, m) = (DemKey(BitString::from_u64(kv, 2)), BitString::from_u64(mv, 2));
                let ct = encap_otp(&k, &m).unwrap();
                assert_eq!(decap(&k, &ct), Some(m));
            }
        }
    }

    #[test]
    fn otp_wrong_key_shifts_plaintext() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..100 {
            let k = gen(16, &mut rng).unwrap();
            let k2 = gen(16, &mut rng).unwrap();
            let m = BitString::random(12, &mut rng);
            let ct = encap(DemVariant::Otp, &k, &m, &mut rng).unwrap();
            let expect = m.xor(&k.0.slice(0..12)).unwrap().xor(&k2.0.slice(0..12)).unwrap();
            assert_eq!(decap(&k2, &ct), Some(expect));
        }
    }

    #[test]
    fn roundtrip_random_messages() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let len = rng.gen_range(1..=64);
            let m = BitString::random(len, &mut rng);
            for variant in [DemVariant::Otp, DemVariant::Stream] {
                let key = gen(if variant == DemVariant::Otp { 64 } else { 128 }, &mut rng).unwrap();
                let ct = encap(variant, &key, &m, &mut rng).unwrap();
                assert_eq!(decap(&key, &ct), Some(m.clone()));
            }
        }
    }

    #[test]
    fn stream_nonces_vary_ciphertexts() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let key = gen(128, &mut rng).unwrap();
        let m = BitString::random(64, &mut rng);
        let cts: HashSet<Vec<u8>> = (0..1000)
            .map(|_| encap(DemVariant::Stream, &key, &m, &mut rng).unwrap().to_bytes())
            .collect();
        assert_eq!(cts.len(), 1000);
    }

    #[test]
    fn stream_key_limits() {
        let m = BitString::zeros(4);
        let long = DemKey(BitString::zeros(129));
        assert_eq!(encap_stream(&long, &m, [0; NONCE_LEN]), Err(DemError::KeyTooLong(129)));
    }

    #[test]
    fn framing_rejects_damage() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let key = gen(128, &mut rng).unwrap();
        let m = BitString::random(20, &mut rng);
        for variant in [DemVariant::Otp, DemVariant::Stream] {
            let bytes = encap(variant, &key, &m, &mut rng).unwrap().to_bytes();
            assert_eq!(decap_bytes(&key, &bytes[..bytes.len() - 1], 20), None);
            let mut extra = bytes.clone();
            extra.push(0);
            assert_eq!(decap_bytes(&key, &extra, 20), None);
            let mut bad_tag = bytes.clone();
            bad_tag[0] = 0x07;
            assert_eq!(decap_bytes(&key, &bad_tag, 20), None);
        }
        assert_eq!(decap_bytes(&key, &[], 0), None);
        assert_eq!(decap_bytes(&key, &[TAG_STREAM, 1, 2], 0), None);
    }

    #[test]
    fn mismatched_variant_is_rejected() {
        let ct = DemCiphertext {
            variant: DemVariant::Stream,
            nonce: None,
            payload: BitString::zeros(3),
        };
        assert_eq!(decap(&DemKey(BitString::zeros(8)), &ct), None);
    }
}
