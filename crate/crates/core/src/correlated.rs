//! The public source of correlated randomness.
//!
//! Binary-symmetric broadcast model: `X` is uniform, Bob's `Y` and Eve's `Z`
//! are independent noisy copies of `X` through bit-flip channels. Meaningful
//! security runs need `p_e > p_b`; this is not enforced.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SourceError {
    #[error("sample length must be at least 1")]
    EmptySample,
    #[error("flip probability {name} = {value} outside [0, 0.5]")]
    FlipProbability { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub n: usize,
    pub p_b: f64,
    pub p_e: f64,
}

impl SourceSpec {
    pub fn new(n: usize, p_b: f64, p_e: f64) -> Result<Self, SourceError> {
        let spec = Self { n, p_b, p_e };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SourceError> {
        if self.n == 0 {
            return Err(SourceError::EmptySample);
        }
        for (name, value) in [("p_b", self.p_b), ("p_e", self.p_e)] {
            if !(0.0..=0.5).contains(&value) {
                return Err(SourceError::FlipProbability { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelatedTriple {
    pub x: BitString,
    pub y: BitString,
    pub z: BitString,
}

pub fn sample<R: Rng + ?Sized>(spec: &SourceSpec, rng: &mut R) -> CorrelatedTriple {
    let x = BitString::random(spec.n, rng);
    let y = noisy_copy(&x, spec.p_b, rng);
    let z = noisy_copy(&x, spec.p_e, rng);
    CorrelatedTriple { x, y, z }
}

fn noisy_copy<R: Rng + ?Sized>(x: &BitString, p: f64, rng: &mut R) -> BitString {
    if p == 0.0 {
        return x.clone();
    }
    x.iter().map(|b| b ^ rng.gen_bool(p)).collect()
}
