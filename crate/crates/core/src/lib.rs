//! Hybrid encryption with certified deletion in the preprocessing model.
//!
//! A sender and receiver share correlated randomness with an eavesdropper.
//! An information-theoretic KEM turns the correlation into a key, and a
//! quantum DEM with certified deletion encrypts under that key. The receiver
//! can either decrypt or destroy the quantum register and hand back a
//! classical certificate that the sender verifies.

pub mod bits;
pub mod dem;
pub mod demcd;
pub mod correlated;
pub mod games;
pub mod gf2;
pub mod ikem;
pub mod oracle;
pub mod phecd;
pub mod qsim;
