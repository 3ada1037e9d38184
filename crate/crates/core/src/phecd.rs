//! The composed scheme: an iKEM key drives a DEM-CD payload.
//!
//! By default one iKEM encapsulation covers the whole message and the DEM-CD
//! encrypts it bit by bit under that key. [`CapsuleMode::PerBit`] instead runs
//! a fresh encapsulation for every bit.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{BitString, Reader};
use crate::correlated::CorrelatedTriple;
use crate::dem::{DemKey, DemVariant, STREAM_KEY_BITS};
use crate::demcd::{self, Certificate, DemCd, DemCdCiphertext, DemCdError, VerificationKey, VrfyMode};
use crate::ikem::{self, IkemCapsule, IkemConfig, IkemError, IkemKey, IkemParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhecdError {
    #[error(transparent)]
    Ikem(#[from] IkemError),
    #[error(transparent)]
    DemCd(#[from] DemCdError),
    #[error("invalid scheme configuration: {0}")]
    Config(String),
    #[error("message of {got} bits exceeds the {max}-bit limit")]
    MessageTooLong { max: usize, got: usize },
    #[error("message must contain at least one bit")]
    EmptyMessage,
    #[error("malformed encoding: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapsuleMode {
    #[default]
    PerMessage,
    PerBit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub ikem: IkemConfig,
    pub lambda: usize,
    pub dem: DemVariant,
    #[serde(default)]
    pub vrfy_mode: VrfyMode,
    #[serde(default)]
    pub capsule_mode: CapsuleMode,
}

impl SchemeConfig {
    /// Noisy reference point with a 16-qubit payload per bit.
    pub fn reference(dem: DemVariant) -> Self {
        let key_len = match dem {
            DemVariant::Otp => 640,
            DemVariant::Stream => STREAM_KEY_BITS,
        };
        Self {
            ikem: IkemConfig::reference(key_len),
            lambda: 16,
            dem,
            vrfy_mode: VrfyMode::Default,
            capsule_mode: CapsuleMode::PerMessage,
        }
    }

    pub fn game(dem: DemVariant, lambda: usize) -> Self {
        Self {
            ikem: IkemConfig::game(),
            lambda,
            dem,
            vrfy_mode: VrfyMode::Default,
            capsule_mode: CapsuleMode::PerMessage,
        }
    }

    /// Enumerable iKEM with a one-qubit, one-time-pad payload.
    pub fn tiny(p_e: f64) -> Self {
        Self {
            ikem: IkemConfig::tiny(p_e),
            lambda: 1,
            dem: DemVariant::Otp,
            vrfy_mode: VrfyMode::Default,
            capsule_mode: CapsuleMode::PerMessage,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scheme {
    config: SchemeConfig,
    ikem: IkemParams,
    demcd: DemCd,
}

/// Classical capsules plus the per-bit DEM-CD ciphertexts.
#[derive(Debug, Clone)]
pub struct HybridCiphertext {
    pub capsules: Vec<IkemCapsule>,
    pub payload: Vec<DemCdCiphertext>,
}

/// Full output of an encryption, including the keys a game may release.
#[derive(Debug, Clone)]
pub struct Encryption {
    pub vks: Vec<VerificationKey>,
    pub ct: HybridCiphertext,
    /// One DEM key per message bit.
    pub unit_keys: Vec<DemKey>,
}

impl Scheme {
    pub fn new(config: SchemeConfig) -> Result<Self, PhecdError> {
        let ikem = IkemParams::new(config.ikem.clone())?;
        let demcd = DemCd::new(config.dem, config.lambda)?;
        let key_len = ikem.key_len();
        match config.dem {
            DemVariant::Stream if !(1..=STREAM_KEY_BITS).contains(&key_len) => {
                return Err(PhecdError::Config(format!(
                    "stream payload needs a key of 1..={STREAM_KEY_BITS} bits, iKEM gives {key_len}"
                )));
            }
            DemVariant::Otp if key_len < config.lambda + 1 => {
                return Err(PhecdError::Config(format!(
                    "one-time-pad payload needs at least {} key bits per message bit, iKEM gives {key_len}",
                    config.lambda + 1
                )));
            }
            _ => {}
        }
        Ok(Self { config, ikem, demcd })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn ikem(&self) -> &IkemParams {
        &self.ikem
    }

    pub fn demcd(&self) -> &DemCd {
        &self.demcd
    }

    pub fn lambda(&self) -> usize {
        self.config.lambda
    }

    pub fn vrfy_mode(&self) -> VrfyMode {
        self.config.vrfy_mode
    }

    /// Longest message one encryption accepts; `None` when unbounded.
    pub fn max_message_bits(&self) -> Option<usize> {
        match (self.config.dem, self.config.capsule_mode) {
            (DemVariant::Otp, CapsuleMode::PerMessage) => {
                Some(self.ikem.key_len() / (self.config.lambda + 1))
            }
            _ => None,
        }
    }

    pub fn keygen<R: Rng + ?Sized>(&self, rng: &mut R) -> CorrelatedTriple {
        ikem::gen(&self.ikem, rng)
    }

    pub fn enc<R: Rng + ?Sized>(
        &self,
        x: &BitString,
        message: &BitString,
        rng: &mut R,
    ) -> Result<(Vec<VerificationKey>, HybridCiphertext), PhecdError> {
        let e = self.encrypt(x, message, rng)?;
        Ok((e.vks, e.ct))
    }

    pub fn encrypt<R: Rng + ?Sized>(
        &self,
        x: &BitString,
        message: &BitString,
        rng: &mut R,
    ) -> Result<Encryption, PhecdError> {
        if message.is_empty() {
            return Err(PhecdError::EmptyMessage);
        }
        if let Some(max) = self.max_message_bits() {
            if message.len() > max {
                return Err(PhecdError::MessageTooLong {
                    max,
                    got: message.len(),
                });
            }
        }
        let mut capsules = Vec::new();
        let mut unit_keys = Vec::with_capacity(message.len());
        match self.config.capsule_mode {
            CapsuleMode::PerMessage => {
                let (key, capsule) = ikem::encap(x, &self.ikem, rng)?;
                capsules.push(capsule);
                let key = dem_key(&key);
                for i in 0..message.len() {
                    unit_keys.push(self.demcd.unit_key(&key, i)?);
                }
            }
            CapsuleMode::PerBit => {
                for _ in 0..message.len() {
                    let (key, capsule) = ikem::encap(x, &self.ikem, rng)?;
                    capsules.push(capsule);
                    unit_keys.push(self.demcd.unit_key(&dem_key(&key), 0)?);
                }
            }
        }
        let mut vks = Vec::with_capacity(message.len());
        let mut payload = Vec::with_capacity(message.len());
        for (bit, key) in message.iter().zip(&unit_keys) {
            let (vk, c2) = self.demcd.encap(key, bit, rng)?;
            vks.push(vk);
            payload.push(c2);
        }
        Ok(Encryption {
            vks,
            ct: HybridCiphertext { capsules, payload },
            unit_keys,
        })
    }

    /// Per-bit DEM keys recovered from `y`, or `None` if any capsule fails.
    pub fn recover_unit_keys(
        &self,
        y: &BitString,
        ct: &HybridCiphertext,
    ) -> Result<Option<Vec<DemKey>>, PhecdError> {
        let bits = ct.payload.len();
        let expected = match self.config.capsule_mode {
            CapsuleMode::PerMessage => 1,
            CapsuleMode::PerBit => bits,
        };
        if ct.capsules.len() != expected {
            return Err(DemCdError::CountMismatch {
                expected,
                got: ct.capsules.len(),
            }
            .into());
        }
        let mut keys = Vec::with_capacity(bits);
        for (j, capsule) in ct.capsules.iter().enumerate() {
            let Some(key) = ikem::decap(y, capsule, &self.ikem)? else {
                return Ok(None);
            };
            let key = dem_key(&key);
            match self.config.capsule_mode {
                CapsuleMode::PerMessage => {
                    for i in 0..bits {
                        keys.push(self.demcd.unit_key(&key, i)?);
                    }
                }
                CapsuleMode::PerBit => {
                    debug_assert_eq!(keys.len(), j);
                    keys.push(self.demcd.unit_key(&key, 0)?);
                }
            }
        }
        Ok(Some(keys))
    }

    /// `Ok(None)` is ⊥: a capsule or a classical record was rejected.
    pub fn dec<R: Rng + ?Sized>(
        &self,
        y: &BitString,
        ct: &mut HybridCiphertext,
        rng: &mut R,
    ) -> Result<Option<BitString>, PhecdError> {
        if ct.payload.iter().any(|c2| c2.qpart.is_consumed()) {
            return Err(DemCdError::Qsim(crate::qsim::QsimError::Consumed).into());
        }
        let Some(keys) = self.recover_unit_keys(y, ct)? else {
            return Ok(None);
        };
        let mut out = BitString::default();
        for (c2, key) in ct.payload.iter_mut().zip(&keys) {
            match self.demcd.decap(key, c2, rng)? {
                Some(bit) => out.push(bit),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    pub fn del<R: Rng + ?Sized>(
        &self,
        ct: &mut HybridCiphertext,
        rng: &mut R,
    ) -> Result<Vec<Certificate>, PhecdError> {
        Ok(self.demcd.del_multi(&mut ct.payload, rng)?)
    }

    pub fn vrfy(&self, vks: &[VerificationKey], certs: &[Certificate]) -> Result<bool, PhecdError> {
        self.vrfy_with(vks, certs, self.config.vrfy_mode)
    }

    pub fn vrfy_with(
        &self,
        vks: &[VerificationKey],
        certs: &[Certificate],
        mode: VrfyMode,
    ) -> Result<bool, PhecdError> {
        Ok(demcd::vrfy_all(vks, certs, mode)?)
    }
}

/// The iKEM key read as DEM key material.
pub fn dem_key(key: &IkemKey) -> DemKey {
    DemKey(key.bits().clone())
}

impl HybridCiphertext {
    /// Classical parts: `u32 capsule count ‖ capsules ‖ u32 bit count ‖
    /// length-prefixed cparts`. Registers are never serialized.
    pub fn classical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.capsules.len() as u32).to_le_bytes());
        for c in &self.capsules {
            c.write(&mut out);
        }
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        for c2 in &self.payload {
            crate::bits::write_bytes_field(&mut out, &c2.cpart.to_bytes());
        }
        out
    }

    /// Symbolic view of the registers, one entry per bit.
    pub fn register_summary(&self) -> Vec<String> {
        self.payload.iter().map(|c2| c2.qpart.summary()).collect()
    }
}

/// Parsed classical parts of a hybrid ciphertext.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalParts {
    pub capsules: Vec<IkemCapsule>,
    pub cparts: Vec<crate::dem::DemCiphertext>,
}

pub fn parse_classical(bytes: &[u8], demcd: &DemCd) -> Result<ClassicalParts, PhecdError> {
    let bad = |e: crate::bits::Truncated| PhecdError::Malformed(e.to_string());
    let mut reader = Reader::new(bytes);
    let count = reader.u32().map_err(bad)? as usize;
    let capsules = (0..count)
        .map(|_| IkemCapsule::read(&mut reader))
        .collect::<Result<Vec<_>, _>>()?;
    let bits = reader.u32().map_err(bad)? as usize;
    let cparts = (0..bits)
        .map(|_| {
            let raw = reader.bytes_field().map_err(bad)?;
            Ok(demcd.cpart_from_bytes(raw)?)
        })
        .collect::<Result<Vec<_>, PhecdError>>()?;
    if !reader.is_done() {
        return Err(PhecdError::Malformed("trailing bytes".into()));
    }
    Ok(ClassicalParts { capsules, cparts })
}

/// `u32 count ‖ (x ‖ θ)*`.
pub fn vks_to_bytes(vks: &[VerificationKey]) -> Vec<u8> {
    let mut out = (vks.len() as u32).to_le_bytes().to_vec();
    for vk in vks {
        vk.write(&mut out);
    }
    out
}

pub fn vks_from_bytes(bytes: &[u8]) -> Result<Vec<VerificationKey>, PhecdError> {
    let mut reader = Reader::new(bytes);
    let count = reader
        .u32()
        .map_err(|e| PhecdError::Malformed(e.to_string()))?;
    let vks = (0..count)
        .map(|_| VerificationKey::read(&mut reader))
        .collect::<Result<Vec<_>, _>>()?;
    if !reader.is_done() {
        return Err(PhecdError::Malformed("trailing bytes".into()));
    }
    Ok(vks)
}

/// `u32 count ‖ cert*`.
pub fn certs_to_bytes(certs: &[Certificate]) -> Vec<u8> {
    let mut out = (certs.len() as u32).to_le_bytes().to_vec();
    for c in certs {
        c.write(&mut out);
    }
    out
}

pub fn certs_from_bytes(bytes: &[u8]) -> Result<Vec<Certificate>, PhecdError> {
    let mut reader = Reader::new(bytes);
    let count = reader
        .u32()
        .map_err(|e| PhecdError::Malformed(e.to_string()))?;
    let certs = (0..count)
        .map(|_| Certificate::read(&mut reader))
        .collect::<Result<Vec<_>, _>>()?;
    if !reader.is_done() {
        return Err(PhecdError::Malformed("trailing bytes".into()));
    }
    Ok(certs)
}
