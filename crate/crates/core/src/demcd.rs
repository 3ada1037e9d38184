//! One-bit data encapsulation with certified deletion, Wiesner-coded.
//!
//! A bit `m` is hidden behind the parity of the computational-basis positions
//! of a BB84 string `x`; the classical part carries `θ ‖ m′` under the DEM,
//! with `m′ = m ⊕ (⊕_{θ_i = 0} x_i)`. Decryption measures in `θ`; deletion
//! measures everything in the Hadamard basis, which destroys the mask.
//!
//! Longer messages are encrypted bit by bit with fresh `(x, θ)` per bit. With
//! the one-time pad, bit `i` uses key segment `[i(λ+1), (i+1)(λ+1))`; with the
//! stream cipher every bit reuses the key under a fresh nonce.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{self, BitString, Reader};
use crate::dem::{self, DemCiphertext, DemError, DemKey, DemVariant, STREAM_KEY_BITS};
use crate::qsim::{self, BasisString, QRegister, QsimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DemCdError {
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Dem(#[from] DemError),
    #[error("security parameter must be at least 1")]
    InvalidLambda,
    #[error("length mismatch: expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("expected {expected} items, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("malformed encoding: {0}")]
    Malformed(String),
}

/// Which certificate positions are checked.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VrfyMode {
    /// Only positions with `θ_i = 1`.
    #[default]
    Default,
    /// Every position.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationKey {
    pub x: BitString,
    pub theta: BasisString,
}

impl VerificationKey {
    pub fn lambda(&self) -> usize {
        self.x.len()
    }

    pub fn write(&self, out: &mut Vec<u8>) {
        bits::write_field(out, &self.x);
        bits::write_field(out, &self.theta);
    }

    pub fn read(reader: &mut Reader<'_>) -> Result<Self, DemCdError> {
        let x = reader.field().map_err(malformed)?;
        let theta = reader.field().map_err(malformed)?;
        if x.len() != theta.len() {
            return Err(DemCdError::Malformed("x and theta lengths differ".into()));
        }
        Ok(Self { x, theta })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate(pub BitString);

impl Certificate {
    pub fn write(&self, out: &mut Vec<u8>) {
        bits::write_field(out, &self.0);
    }

    pub fn read(reader: &mut Reader<'_>) -> Result<Self, DemCdError> {
        Ok(Self(reader.field().map_err(malformed)?))
    }
}

fn malformed(e: bits::Truncated) -> DemCdError {
    DemCdError::Malformed(e.to_string())
}

/// Quantum register plus the classical DEM record. Only `cpart` has a wire
/// form; the register lives inside the simulation.
#[derive(Debug, Clone)]
pub struct DemCdCiphertext {
    pub qpart: QRegister,
    pub cpart: DemCiphertext,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemCd {
    variant: DemVariant,
    lambda: usize,
}

impl DemCd {
    pub fn new(variant: DemVariant, lambda: usize) -> Result<Self, DemCdError> {
        if lambda == 0 {
            return Err(DemCdError::InvalidLambda);
        }
        Ok(Self { variant, lambda })
    }

    pub fn variant(&self) -> DemVariant {
        self.variant
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    /// Smallest key length that encrypts `message_bits` bits.
    pub fn key_len(&self, message_bits: usize) -> usize {
        match self.variant {
            DemVariant::Otp => message_bits * (self.lambda + 1),
            DemVariant::Stream => STREAM_KEY_BITS,
        }
    }

    pub fn gen<R: Rng + ?Sized>(&self, message_bits: usize, rng: &mut R) -> Result<DemKey, DemCdError> {
        Ok(dem::gen(self.key_len(message_bits.max(1)), rng)?)
    }

    /// Key used for message bit `index`.
    pub fn unit_key(&self, key: &DemKey, index: usize) -> Result<DemKey, DemCdError> {
        match self.variant {
            DemVariant::Otp => {
                let width = self.lambda + 1;
                let end = (index + 1) * width;
                if key.len() < end {
                    return Err(DemError::KeyTooShort {
                        need: end,
                        have: key.len(),
                    }
                    .into());
                }
                Ok(DemKey(key.bits().slice(index * width..end)))
            }
            DemVariant::Stream => Ok(key.clone()),
        }
    }

    pub fn encap<R: Rng + ?Sized>(
        &self,
        key: &DemKey,
        message: bool,
        rng: &mut R,
    ) -> Result<(VerificationKey, DemCdCiphertext), DemCdError> {
        let x = BitString::random(self.lambda, rng);
        let theta = BitString::random(self.lambda, rng);
        self.encap_with(key, message, x, theta, rng)
    }

    /// Encapsulation with caller-chosen `(x, θ)`.
    pub fn encap_with<R: Rng + ?Sized>(
        &self,
        key: &DemKey,
        message: bool,
        x: BitString,
        theta: BasisString,
        rng: &mut R,
    ) -> Result<(VerificationKey, DemCdCiphertext), DemCdError> {
        for len in [x.len(), theta.len()] {
            self.check_len(len)?;
        }
        let masked = message ^ x.parity_where(&theta, false).expect("checked lengths");
        let mut record = theta.clone();
        record.push(masked);
        let cpart = dem::encap(self.variant, key, &record, rng)?;
        let qpart = qsim::prepare_bb84(&x, &theta)?;
        Ok((VerificationKey { x, theta }, DemCdCiphertext { qpart, cpart }))
    }

    /// `Ok(None)` when the classical record is rejected; the register is left
    /// untouched in that case.
    pub fn decap<R: Rng + ?Sized>(
        &self,
        key: &DemKey,
        ct: &mut DemCdCiphertext,
        rng: &mut R,
    ) -> Result<Option<bool>, DemCdError> {
        if ct.qpart.is_consumed() {
            return Err(QsimError::Consumed.into());
        }
        let Some(record) = dem::decap(key, &ct.cpart) else {
            return Ok(None);
        };
        if record.len() != self.lambda + 1 || ct.qpart.num_qubits() != self.lambda {
            return Ok(None);
        }
        let theta = record.slice(0..self.lambda);
        let masked = record.get(self.lambda);
        let x = qsim::measure(&mut ct.qpart, &theta, rng)?;
        Ok(Some(masked ^ x.parity_where(&theta, false).expect("equal lengths")))
    }

    pub fn del<R: Rng + ?Sized>(
        &self,
        ct: &mut DemCdCiphertext,
        rng: &mut R,
    ) -> Result<Certificate, DemCdError> {
        let all_hadamard = BitString::ones(ct.qpart.num_qubits());
        Ok(Certificate(qsim::measure(&mut ct.qpart, &all_hadamard, rng)?))
    }

    pub fn vrfy(
        &self,
        vk: &VerificationKey,
        cert: &Certificate,
        mode: VrfyMode,
    ) -> Result<bool, DemCdError> {
        vrfy(vk, cert, mode)
    }

    pub fn encap_multi<R: Rng + ?Sized>(
        &self,
        key: &DemKey,
        message: &BitString,
        rng: &mut R,
    ) -> Result<(Vec<VerificationKey>, Vec<DemCdCiphertext>), DemCdError> {
        let mut vks = Vec::with_capacity(message.len());
        let mut cts = Vec::with_capacity(message.len());
        for (i, bit) in message.iter().enumerate() {
            let (vk, ct) = self.encap(&self.unit_key(key, i)?, bit, rng)?;
            vks.push(vk);
            cts.push(ct);
        }
        Ok((vks, cts))
    }

    /// `Ok(None)` if any bit's classical record is rejected.
    pub fn decap_multi<R: Rng + ?Sized>(
        &self,
        key: &DemKey,
        cts: &mut [DemCdCiphertext],
        rng: &mut R,
    ) -> Result<Option<BitString>, DemCdError> {
        let mut out = BitString::default();
        for (i, ct) in cts.iter_mut().enumerate() {
            match self.decap(&self.unit_key(key, i)?, ct, rng)? {
                Some(bit) => out.push(bit),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    pub fn del_multi<R: Rng + ?Sized>(
        &self,
        cts: &mut [DemCdCiphertext],
        rng: &mut R,
    ) -> Result<Vec<Certificate>, DemCdError> {
        cts.iter_mut().map(|ct| self.del(ct, rng)).collect()
    }

    pub fn vrfy_multi(
        &self,
        vks: &[VerificationKey],
        certs: &[Certificate],
        mode: VrfyMode,
    ) -> Result<bool, DemCdError> {
        vrfy_all(vks, certs, mode)
    }

    /// Parses a classical part carrying `θ ‖ m′` for this `λ`.
    pub fn cpart_from_bytes(&self, bytes: &[u8]) -> Result<DemCiphertext, DemCdError> {
        DemCiphertext::from_bytes(bytes, self.lambda + 1)
            .ok_or_else(|| DemCdError::Malformed("classical part framing".into()))
    }

    fn check_len(&self, got: usize) -> Result<(), DemCdError> {
        if got == self.lambda {
            Ok(())
        } else {
            Err(DemCdError::LengthMismatch {
                expected: self.lambda,
                got,
            })
        }
    }
}

pub fn vrfy(vk: &VerificationKey, cert: &Certificate, mode: VrfyMode) -> Result<bool, DemCdError> {
    let lambda = vk.x.len();
    for got in [vk.theta.len(), cert.0.len()] {
        if got != lambda {
            return Err(DemCdError::LengthMismatch {
                expected: lambda,
                got,
            });
        }
    }
    Ok((0..lambda).all(|i| {
        let checked = mode == VrfyMode::Strict || vk.theta.get(i);
        !checked || cert.0.get(i) == vk.x.get(i)
    }))
}

/// Conjunction of per-bit verifications.
pub fn vrfy_all(
    vks: &[VerificationKey],
    certs: &[Certificate],
    mode: VrfyMode,
) -> Result<bool, DemCdError> {
    if vks.len() != certs.len() {
        return Err(DemCdError::CountMismatch {
            expected: vks.len(),
            got: certs.len(),
        });
    }
    for (vk, cert) in vks.iter().zip(certs) {
        if !vrfy(vk, cert, mode)? {
            return Ok(false);
        }
    }
    Ok(true)
}
