//! Information-theoretic key encapsulation over the correlated source.
//!
//! Reconciliation sends the syndrome of `X` under a chunked (shortened) Hamming
//! code. Confirmation and extraction both come from one universal hash family,
//! `h_a(X) = a·X` in GF(2^n): the low `check_len` bits of the product are the
//! tag and the next `key_len` bits are the key. The multiplier `a` is the low
//! `n` bits of a fresh salt of `max(n, 64)` bits, so every family member is
//! equally likely and exact enumeration over members matches enumeration over
//! salts.
//!
//! Parameter presets are this crate's own choices; see the README for how they
//! sit against the min-entropy budget.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{self, BitString, Reader};
use crate::correlated::{self, CorrelatedTriple, SourceError, SourceSpec};
use crate::gf2::BinaryField;

pub const MIN_SALT_LEN: usize = 64;
/// Largest sample length accepted by [`exact_key_distance`].
pub const MAX_EXACT_N: usize = 10;
pub const MAX_EXACT_KEY_LEN: usize = 4;
/// Largest sample length accepted by [`key_posterior`].
pub const MAX_POSTERIOR_N: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IkemError {
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("sample has {got} bits, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("malformed capsule: {0}")]
    MalformedCapsule(String),
    #[error("exact enumeration needs n <= {MAX_EXACT_N} and key_len <= {MAX_EXACT_KEY_LEN}")]
    TooLarge,
}

/// Syndrome code made of Hamming chunks of length `2^m - 1`; the final chunk
/// is shortened. `m = 0` sends no reconciliation data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HammingCode {
    m: usize,
}

impl HammingCode {
    pub fn new(m: usize) -> Result<Self, IkemError> {
        if m > 16 {
            return Err(IkemError::Params(format!("hamming_m = {m} exceeds 16")));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn chunk_len(&self) -> usize {
        (1 << self.m) - 1
    }

    pub fn syndrome_len(&self, n: usize) -> usize {
        if self.m == 0 {
            0
        } else {
            self.m * n.div_ceil(self.chunk_len())
        }
    }

    pub fn syndrome(&self, x: &BitString) -> BitString {
        if self.m == 0 {
            return BitString::default();
        }
        let mut out = BitString::default();
        for chunk in x.as_slice().chunks(self.chunk_len()) {
            let s = chunk_syndrome(chunk);
            for j in 0..self.m {
                out.push((s >> j) & 1 == 1);
            }
        }
        out
    }

    /// Corrects up to one error per chunk; `None` when a syndrome points
    /// outside a shortened chunk.
    pub fn decode(&self, y: &BitString, syndrome: &BitString) -> Option<BitString> {
        if self.m == 0 {
            return Some(y.clone());
        }
        let mut x = y.clone();
        let chunk_len = self.chunk_len();
        for (c, chunk) in y.as_slice().chunks(chunk_len).enumerate() {
            let received = (0..self.m).fold(0usize, |acc, j| {
                acc | (usize::from(syndrome.get(c * self.m + j)) << j)
            });
            let diff = chunk_syndrome(chunk) ^ received;
            if diff == 0 {
                continue;
            }
            if diff > chunk.len() {
                return None;
            }
            x.flip(c * chunk_len + diff - 1);
        }
        Some(x)
    }
}

fn chunk_syndrome(chunk: &[bool]) -> usize {
    chunk
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(0, |acc, (i, _)| acc ^ (i + 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IkemConfig {
    pub source: SourceSpec,
    pub key_len: usize,
    pub check_len: usize,
    pub hamming_m: usize,
    /// Target decapsulation failure probability.
    pub delta: f64,
}

impl IkemConfig {
    /// Noisy reference point: 2048-bit samples, Hamming(15,11) chunks.
    pub fn reference(key_len: usize) -> Self {
        Self {
            source: SourceSpec {
                n: 2048,
                p_b: 0.0005,
                p_e: 0.4,
            },
            key_len,
            check_len: 16,
            hamming_m: 4,
            delta: 0.01,
        }
    }

    /// Mid-size point used by the game harness.
    pub fn game() -> Self {
        Self {
            source: SourceSpec {
                n: 256,
                p_b: 0.001,
                p_e: 0.4,
            },
            key_len: 64,
            check_len: 8,
            hamming_m: 4,
            delta: 0.01,
        }
    }

    /// Enumerable point: 8-bit samples, no reconciliation data.
    pub fn tiny(p_e: f64) -> Self {
        Self {
            source: SourceSpec { n: 8, p_b: 0.0, p_e },
            key_len: 2,
            check_len: 1,
            hamming_m: 0,
            delta: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IkemParams {
    config: IkemConfig,
    code: HammingCode,
    field: BinaryField,
}

impl IkemParams {
    pub fn new(config: IkemConfig) -> Result<Self, IkemError> {
        config.source.validate()?;
        let n = config.source.n;
        let code = HammingCode::new(config.hamming_m)?;
        if code.syndrome_len(n) >= n {
            return Err(IkemError::Params(format!(
                "reconciliation length {} must be below n = {n}",
                code.syndrome_len(n)
            )));
        }
        if config.check_len == 0 {
            return Err(IkemError::Params("check_len must be at least 1".into()));
        }
        if config.check_len + config.key_len > n {
            return Err(IkemError::Params(format!(
                "check_len + key_len = {} exceeds n = {n}",
                config.check_len + config.key_len
            )));
        }
        if !(0.0..=1.0).contains(&config.delta) {
            return Err(IkemError::Params("delta must lie in [0, 1]".into()));
        }
        Ok(Self {
            field: BinaryField::new(n),
            code,
            config,
        })
    }

    pub fn config(&self) -> &IkemConfig {
        &self.config
    }

    pub fn source(&self) -> &SourceSpec {
        &self.config.source
    }

    pub fn n(&self) -> usize {
        self.config.source.n
    }

    pub fn key_len(&self) -> usize {
        self.config.key_len
    }

    pub fn check_len(&self) -> usize {
        self.config.check_len
    }

    pub fn recon_len(&self) -> usize {
        self.code.syndrome_len(self.n())
    }

    pub fn salt_len(&self) -> usize {
        self.n().max(MIN_SALT_LEN)
    }

    pub fn delta(&self) -> f64 {
        self.config.delta
    }

    pub fn code(&self) -> &HammingCode {
        &self.code
    }

    /// `(tag, key)` for a sample under the family member selected by `salt`.
    pub fn hash_outputs(&self, salt: &BitString, x: &BitString) -> (BitString, IkemKey) {
        let product = self.field.mul_bits(&salt.slice(0..self.n()), x);
        let c = self.check_len();
        (
            product.slice(0..c),
            IkemKey(product.slice(c..c + self.key_len())),
        )
    }

    fn check_sample(&self, x: &BitString) -> Result<(), IkemError> {
        if x.len() == self.n() {
            Ok(())
        } else {
            Err(IkemError::LengthMismatch {
                expected: self.n(),
                got: x.len(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IkemKey(pub BitString);

impl IkemKey {
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
pub struct IkemCapsule {
    pub salt: BitString,
    pub recon: BitString,
    pub tag: BitString,
}

impl IkemCapsule {
    /// `salt ‖ recon ‖ tag`, each a length-prefixed field.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write(&mut out);
        out
    }

    pub fn write(&self, out: &mut Vec<u8>) {
        bits::write_field(out, &self.salt);
        bits::write_field(out, &self.recon);
        bits::write_field(out, &self.tag);
    }

    pub fn read(reader: &mut Reader<'_>) -> Result<Self, IkemError> {
        let malformed = |e: bits::Truncated| IkemError::MalformedCapsule(e.to_string());
        Ok(Self {
            salt: reader.field().map_err(malformed)?,
            recon: reader.field().map_err(malformed)?,
            tag: reader.field().map_err(malformed)?,
        })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IkemError> {
        let mut reader = Reader::new(bytes);
        let capsule = Self::read(&mut reader)?;
        if !reader.is_done() {
            return Err(IkemError::MalformedCapsule("trailing bytes".into()));
        }
        Ok(capsule)
    }

    fn check_shape(&self, params: &IkemParams) -> Result<(), IkemError> {
        let expect = [
            ("salt", self.salt.len(), params.salt_len()),
            ("recon", self.recon.len(), params.recon_len()),
            ("tag", self.tag.len(), params.check_len()),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(IkemError::MalformedCapsule(format!(
                    "{name} has {got} bits, expected {want}"
                )));
            }
        }
        Ok(())
    }
}

pub fn gen<R: Rng + ?Sized>(params: &IkemParams, rng: &mut R) -> CorrelatedTriple {
    correlated::sample(params.source(), rng)
}

pub fn encap<R: Rng + ?Sized>(
    x: &BitString,
    params: &IkemParams,
    rng: &mut R,
) -> Result<(IkemKey, IkemCapsule), IkemError> {
    let salt = BitString::random(params.salt_len(), rng);
    encap_with_salt(x, params, salt)
}

pub fn encap_with_salt(
    x: &BitString,
    params: &IkemParams,
    salt: BitString,
) -> Result<(IkemKey, IkemCapsule), IkemError> {
    params.check_sample(x)?;
    if salt.len() != params.salt_len() {
        return Err(IkemError::Params(format!(
            "salt must have {} bits",
            params.salt_len()
        )));
    }
    let recon = params.code.syndrome(x);
    let (tag, key) = params.hash_outputs(&salt, x);
    Ok((key, IkemCapsule { salt, recon, tag }))
}

/// `Ok(None)` is the ⊥ outcome: decoding failed or the tag did not match.
pub fn decap(
    y: &BitString,
    capsule: &IkemCapsule,
    params: &IkemParams,
) -> Result<Option<IkemKey>, IkemError> {
    params.check_sample(y)?;
    capsule.check_shape(params)?;
    let Some(x_hat) = params.code.decode(y, &capsule.recon) else {
        return Ok(None);
    };
    let (tag, key) = params.hash_outputs(&capsule.salt, &x_hat);
    Ok((tag == capsule.tag).then_some(key))
}

/// Key obtained by treating `z` as the receiver's sample and skipping the tag
/// check; undecodable samples are hashed as they are.
pub fn recompute_key(
    z: &BitString,
    capsule: &IkemCapsule,
    params: &IkemParams,
) -> Result<IkemKey, IkemError> {
    params.check_sample(z)?;
    capsule.check_shape(params)?;
    let x_hat = params
        .code
        .decode(z, &capsule.recon)
        .unwrap_or_else(|| z.clone());
    Ok(params.hash_outputs(&capsule.salt, &x_hat).1)
}

/// Posterior of the key behind `capsule` given Eve's sample `z` and any
/// further `(key, capsule)` pairs produced from the same `X`. Entry `k` is the
/// probability of the key whose `to_u64` value is `k`.
pub fn key_posterior(
    z: &BitString,
    capsule: &IkemCapsule,
    side: &[(IkemKey, IkemCapsule)],
    params: &IkemParams,
) -> Result<Vec<f64>, IkemError> {
    let n = params.n();
    if n > MAX_POSTERIOR_N || params.key_len() > MAX_POSTERIOR_N {
        return Err(IkemError::TooLarge);
    }
    params.check_sample(z)?;
    capsule.check_shape(params)?;
    let p_e = params.source().p_e;
    let zv = z.to_u64();
    let mut post = vec![0.0; 1 << params.key_len()];
    for xv in 0..1u64 << n {
        let x = BitString::from_u64(xv, n);
        let recon = params.code.syndrome(&x);
        if recon != capsule.recon {
            continue;
        }
        let consistent = side.iter().all(|(k, c)| {
            c.recon == recon && params.hash_outputs(&c.salt, &x) == (c.tag.clone(), k.clone())
        });
        if !consistent {
            continue;
        }
        let (tag, key) = params.hash_outputs(&capsule.salt, &x);
        if tag != capsule.tag {
            continue;
        }
        let w = (xv ^ zv).count_ones() as i32;
        post[key.0.to_u64() as usize] += p_e.powi(w) * (1.0 - p_e).powi(n as i32 - w);
    }
    let total: f64 = post.iter().sum();
    if total > 0.0 {
        post.iter_mut().for_each(|p| *p /= total);
    }
    Ok(post)
}

/// Exact `SD((Z, C, K), (Z, C, U))` for one encapsulation, by enumeration over
/// hash members, samples `X` and Eve's observations `Z`.
pub fn exact_key_distance(params: &IkemParams) -> Result<f64, IkemError> {
    let n = params.n();
    let l = params.key_len();
    if n > MAX_EXACT_N || l > MAX_EXACT_KEY_LEN {
        return Err(IkemError::TooLarge);
    }
    if l == 0 {
        return Ok(0.0);
    }
    let size = 1usize << n;
    let p_e = params.source().p_e;
    let by_weight: Vec<f64> = (0..=n)
        .map(|w| p_e.powi(w as i32) * (1.0 - p_e).powi((n - w) as i32))
        .collect();
    let noise: Vec<f64> = (0..size).map(|e| by_weight[e.count_ones() as usize]).collect();
    let samples: Vec<BitString> = (0..size).map(|v| BitString::from_u64(v as u64, n)).collect();
    let recon: Vec<u64> = samples.iter().map(|x| params.code.syndrome(x).to_u64()).collect();
    let key_space = 1usize << l;

    let per_member: Vec<f64> = (0..size)
        .into_par_iter()
        .map(|a| {
            let salt = BitString::from_u64(a as u64, n).concat(&BitString::zeros(params.salt_len() - n));
            let mut group_ids: HashMap<(u64, u64), usize> = HashMap::new();
            let mut group = vec![0usize; size];
            let mut key = vec![0usize; size];
            for (xi, x) in samples.iter().enumerate() {
                let (tag, k) = params.hash_outputs(&salt, x);
                let next = group_ids.len();
                group[xi] = *group_ids.entry((recon[xi], tag.to_u64())).or_insert(next);
                key[xi] = k.bits().to_u64() as usize;
            }
            let mut acc = vec![0.0f64; group_ids.len() * key_space];
            let mut total = 0.0;
            for z in 0..size {
                acc.iter_mut().for_each(|v| *v = 0.0);
                for xi in 0..size {
                    acc[group[xi] * key_space + key[xi]] += noise[z ^ xi];
                }
                for row in acc.chunks(key_space) {
                    let mean = row.iter().sum::<f64>() / key_space as f64;
                    total += row.iter().map(|v| (v - mean).abs()).sum::<f64>();
                }
            }
            // P(z, g, k) = acc / 2^n
            0.5 * total / size as f64
        })
        .collect();
    Ok(per_member.iter().sum::<f64>() / size as f64)
}
