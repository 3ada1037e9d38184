//! Bit strings used for samples, keys, bases and certificates.
//!
//! Bits are stored one per `bool`. When packed into bytes, bit `i` lands in
//! byte `i / 8` at position `i % 8` (least-significant bit first). Every wire
//! format in the crate uses this packing.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitsError {
    #[error("length mismatch: {left} vs {right} bits")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid bit character {0:?}")]
    InvalidChar(char),
    #[error("{bytes} bytes cannot hold {bits} bits")]
    ShortBuffer { bytes: usize, bits: usize },
}

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![false; len])
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![true; len])
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| rng.gen::<bool>()).collect())
    }

    /// Bits of `value`, least-significant bit at index 0.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        Self((0..len).map(|i| (value >> i) & 1 == 1).collect())
    }

    /// Inverse of [`BitString::from_u64`]; panics above 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len() <= 64, "to_u64 supports at most 64 bits");
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString, BitsError> {
        self.check_len(other)?;
        Ok(Self(self.iter().zip(other.iter()).map(|(a, b)| a ^ b).collect()))
    }

    pub fn hamming(&self, other: &BitString) -> Result<usize, BitsError> {
        self.check_len(other)?;
        Ok(self.iter().zip(other.iter()).filter(|(a, b)| a != b).count())
    }

    /// XOR of the bits at positions where `selector` equals `value`.
    pub fn parity_where(&self, selector: &BitString, value: bool) -> Result<bool, BitsError> {
        self.check_len(selector)?;
        Ok(self
            .iter()
            .zip(selector.iter())
            .filter(|&(_, s)| s == value)
            .fold(false, |acc, (b, _)| acc ^ b))
    }

    pub fn slice(&self, range: Range<usize>) -> BitString {
        Self(self.0[range].to_vec())
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        Self(bits)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len().div_ceil(8)];
        for (i, b) in self.iter().enumerate() {
            if b {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, BitsError> {
        if bytes.len() * 8 < len {
            return Err(BitsError::ShortBuffer {
                bytes: bytes.len(),
                bits: len,
            });
        }
        Ok(Self((0..len).map(|i| (bytes[i / 8] >> (i % 8)) & 1 == 1).collect()))
    }

    fn check_len(&self, other: &BitString) -> Result<(), BitsError> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(BitsError::LengthMismatch {
                left: self.len(),
                right: other.len(),
            })
        }
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl FromStr for BitString {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(BitsError::InvalidChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Length-prefixed field: `u32` little-endian bit length, then the packed bits.
pub fn write_field(out: &mut Vec<u8>, bits: &BitString) {
    out.extend_from_slice(&(bits.len() as u32).to_le_bytes());
    out.extend_from_slice(&bits.to_bytes());
}

/// Raw byte field: `u32` little-endian byte length, then the bytes.
pub fn write_bytes_field(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(bytes);
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("truncated input at offset {offset}")]
pub struct Truncated {
    pub offset: usize,
}

/// Cursor over a byte buffer for the length-prefixed layouts.
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn u32(&mut self) -> Result<u32, Truncated> {
        let raw = self.take(4)?;
        Ok(u32::from_le_bytes([raw[0], raw[1], raw[2], raw[3]]))
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], Truncated> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let out = &self.buf[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => Err(Truncated { offset: self.pos }),
        }
    }

    pub fn field(&mut self) -> Result<BitString, Truncated> {
        let bits = self.u32()? as usize;
        let offset = self.pos;
        let raw = self.take(bits.div_ceil(8))?;
        BitString::from_bytes(raw, bits).map_err(|_| Truncated { offset })
    }

    pub fn bytes_field(&mut self) -> Result<&'a [u8], Truncated> {
        let len = self.u32()? as usize;
        self.take(len)
    }

    pub fn is_done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_display() {
        let b: BitString = "0110".parse().unwrap();
        assert_eq!(b.as_slice(), &[false, true, true, false]);
        assert_eq!(b.to_string(), "0110");
        assert!("01x".parse::<BitString>().is_err());
    }

    #[test]
    fn packing_is_lsb_first() {
        let b: BitString = "1000000001".parse().unwrap();
        assert_eq!(b.to_bytes(), vec![0x01, 0x02]);
    }

    #[test]
    fn parity_selects_positions() {
        let x: BitString = "1101".parse().unwrap();
        let theta: BitString = "0011".parse().unwrap();
        // positions 0 and 1 have theta = 0: 1 ^ 1
        assert!(!x.parity_where(&theta, false).unwrap());
        assert!(x.parity_where(&theta, true).unwrap());
        assert!(x.parity_where(&BitString::zeros(4), false).unwrap());
    }

    #[test]
    fn xor_rejects_mismatched_lengths() {
        let a = BitString::zeros(3);
        let b = BitString::zeros(4);
        assert_eq!(
            a.xor(&b),
            Err(BitsError::LengthMismatch { left: 3, right: 4 })
        );
    }

    #[test]
    fn reader_detects_truncation() {
        let mut out = Vec::new();
        write_field(&mut out, &"10110".parse().unwrap());
        out.pop();
        assert!(Reader::new(&out).field().is_err());
    }

    proptest! {
        #[test]
        fn bytes_roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let b = BitString::new(bits);
            let back = BitString::from_bytes(&b.to_bytes(), b.len()).unwrap();
            prop_assert_eq!(back, b);
        }

        #[test]
        fn u64_roundtrip(v in any::<u64>(), len in 0usize..=64) {
            let masked = if len == 64 { v } else { v & ((1u64 << len) - 1) };
            prop_assert_eq!(BitString::from_u64(v, len).to_u64(), masked);
        }
    }
}
