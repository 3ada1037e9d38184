//! Minimal qubit simulation for conjugate coding.
//!
//! Honest protocol runs use product mode: one BB84 state per qubit, so cost is
//! linear in the register size. Dense mode stores a full density matrix and is
//! capped at [`MAX_DENSE_QUBITS`]; it backs the exact oracle.
//!
//! Qubit 0 is the most significant tensor factor, so `|1⟩⊗|+⟩` places the
//! `|+⟩⟨+|` block in the bottom-right quadrant.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;

pub const MAX_DENSE_QUBITS: usize = 3;
pub const TOLERANCE: f64 = 1e-10;

/// `0` selects the computational basis, `1` the Hadamard basis.
pub type BasisString = BitString;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("register already consumed by a destructive measurement")]
    Consumed,
    #[error("length mismatch: expected {expected} qubits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("register of {0} qubits exceeds dense-mode limit of {MAX_DENSE_QUBITS}")]
    TooLarge(usize),
    #[error("empty register")]
    Empty,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not a density matrix: {0}")]
    NotDensity(&'static str),
}

/// Single-qubit measurement bases available to honest parties and adversaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureBasis {
    Computational,
    Hadamard,
    /// Real basis rotated by π/8, halfway between the two BB84 bases.
    Breidbart,
}

impl MeasureBasis {
    pub fn from_bit(hadamard: bool) -> Self {
        if hadamard {
            Self::Hadamard
        } else {
            Self::Computational
        }
    }

    pub fn angle(self) -> f64 {
        match self {
            Self::Computational => 0.0,
            Self::Hadamard => FRAC_PI_4,
            Self::Breidbart => FRAC_PI_8,
        }
    }

    /// Real amplitudes of the basis vector for `outcome`.
    pub fn vector(self, outcome: bool) -> [f64; 2] {
        let (s, c) = self.angle().sin_cos();
        if outcome {
            [-s, c]
        } else {
            [c, s]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bb84State {
    Zero,
    One,
    Plus,
    Minus,
}

impl Bb84State {
    pub fn encode(bit: bool, hadamard: bool) -> Self {
        match (bit, hadamard) {
            (false, false) => Self::Zero,
            (true, false) => Self::One,
            (false, true) => Self::Plus,
            (true, true) => Self::Minus,
        }
    }

    pub fn amplitudes(self) -> [f64; 2] {
        match self {
            Self::Zero => [1.0, 0.0],
            Self::One => [0.0, 1.0],
            Self::Plus => [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            Self::Minus => [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        }
    }

    fn symbol(self) -> char {
        match self {
            Self::Zero => '0',
            Self::One => '1',
            Self::Plus => '+',
            Self::Minus => '-',
        }
    }

    /// Probability of outcome 0. Exact for the two BB84 bases.
    pub fn prob_zero(self, basis: MeasureBasis) -> f64 {
        match (self, basis) {
            (Self::Zero, MeasureBasis::Computational) | (Self::Plus, MeasureBasis::Hadamard) => 1.0,
            (Self::One, MeasureBasis::Computational) | (Self::Minus, MeasureBasis::Hadamard) => 0.0,
            (_, MeasureBasis::Computational) | (_, MeasureBasis::Hadamard) => 0.5,
            (state, basis) => {
                let a = state.amplitudes();
                let v = basis.vector(false);
                let overlap = a[0] * v[0] + a[1] * v[1];
                overlap * overlap
            }
        }
    }
}

/// Hermitian, positive semi-definite, unit-trace matrix on at most three qubits.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self, QsimError> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() {
            return Err(QsimError::DimensionMismatch(dim, matrix.ncols()));
        }
        if !dim.is_power_of_two() || dim > 1 << MAX_DENSE_QUBITS {
            return Err(QsimError::NotDensity("dimension must be 2^k with k <= 3"));
        }
        if (&matrix - matrix.adjoint()).iter().any(|z| z.norm() > TOLERANCE) {
            return Err(QsimError::NotDensity("not Hermitian"));
        }
        if (matrix.trace() - Complex64::new(1.0, 0.0)).norm() > TOLERANCE {
            return Err(QsimError::NotDensity("trace differs from 1"));
        }
        if hermitian_eigenvalues(&matrix).iter().any(|&e| e < -TOLERANCE) {
            return Err(QsimError::NotDensity("negative eigenvalue"));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self, QsimError> {
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        Self::new(&v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    /// `⟨v|ρ|v⟩` for a real vector.
    pub fn expectation_real(&self, v: &[f64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (j, &vj) in v.iter().enumerate() {
                acc += self.matrix[(i, j)] * (vi * vj);
            }
        }
        acc.re
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64, QsimError> {
        if self.dim() != other.dim() {
            return Err(QsimError::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok((0.5 * trace_norm(&(&self.matrix - &other.matrix))).clamp(0.0, 1.0))
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix({}x{})", self.dim(), self.dim())
    }
}

pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    m.clone().symmetric_eigenvalues().iter().copied().collect()
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(m).iter().map(|e| e.abs()).sum()
}

pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, QsimError> {
    a.trace_distance(b)
}

#[derive(Clone, Debug)]
enum Contents {
    Product(Vec<Bb84State>),
    Dense(DensityMatrix),
}

/// A register of qubits that can be measured exactly once.
#[derive(Clone, Debug)]
pub struct QRegister {
    contents: Contents,
    consumed: bool,
}

impl QRegister {
    pub fn from_states(states: Vec<Bb84State>) -> Self {
        Self {
            contents: Contents::Product(states),
            consumed: false,
        }
    }

    pub fn from_density(rho: DensityMatrix) -> Self {
        Self {
            contents: Contents::Dense(rho),
            consumed: false,
        }
    }

    pub fn num_qubits(&self) -> usize {
        match &self.contents {
            Contents::Product(q) => q.len(),
            Contents::Dense(rho) => rho.num_qubits(),
        }
    }

    pub fn is_consumed(&self) -> bool {
        self.consumed
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.contents, Contents::Dense(_))
    }

    /// Symbolic summary such as `1+-0`; `consumed` after measurement.
    pub fn summary(&self) -> String {
        if self.consumed {
            return "consumed".into();
        }
        match &self.contents {
            Contents::Product(q) => q.iter().map(|s| s.symbol()).collect(),
            Contents::Dense(rho) => format!("dense[{}]", rho.num_qubits()),
        }
    }

    /// Measures qubit `i` in `bases[i]` and marks the register consumed.
    pub fn measure_in<R: Rng + ?Sized>(
        &mut self,
        bases: &[MeasureBasis],
        rng: &mut R,
    ) -> Result<BitString, QsimError> {
        if self.consumed {
            return Err(QsimError::Consumed);
        }
        if bases.len() != self.num_qubits() {
            return Err(QsimError::LengthMismatch {
                expected: self.num_qubits(),
                got: bases.len(),
            });
        }
        let out = match &self.contents {
            Contents::Product(states) => states
                .iter()
                .zip(bases)
                .map(|(s, &basis)| sample_outcome(s.prob_zero(basis), rng))
                .collect(),
            Contents::Dense(rho) => measure_dense(rho, bases, rng),
        };
        self.consumed = true;
        Ok(out)
    }
}

fn sample_outcome<R: Rng + ?Sized>(p0: f64, rng: &mut R) -> bool {
    if p0 >= 1.0 {
        false
    } else if p0 <= 0.0 {
        true
    } else if p0 == 0.5 {
        rng.gen::<bool>()
    } else {
        rng.gen::<f64>() >= p0
    }
}

fn measure_dense<R: Rng + ?Sized>(rho: &DensityMatrix, bases: &[MeasureBasis], rng: &mut R) -> BitString {
    let k = bases.len();
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut last = 0;
    for idx in 0..1usize << k {
        let outcome = index_to_bits(idx, k);
        let p = rho.expectation_real(&product_vector(bases, &outcome));
        cumulative += p;
        last = idx;
        if u < cumulative {
            break;
        }
    }
    index_to_bits(last, k)
}

/// Bit string for a basis-state index, qubit 0 as the most significant bit.
pub fn index_to_bits(idx: usize, k: usize) -> BitString {
    (0..k).map(|q| (idx >> (k - 1 - q)) & 1 == 1).collect()
}

/// Tensor product of single-qubit basis vectors for the given outcomes.
pub fn product_vector(bases: &[MeasureBasis], outcome: &BitString) -> Vec<f64> {
    let mut v = vec![1.0];
    for (q, &basis) in bases.iter().enumerate() {
        let single = basis.vector(outcome.get(q));
        v = v
            .iter()
            .flat_map(|&a| [a * single[0], a * single[1]])
            .collect();
    }
    v
}

pub fn prepare_bb84(x: &BitString, theta: &BasisString) -> Result<QRegister, QsimError> {
    if x.is_empty() {
        return Err(QsimError::Empty);
    }
    if x.len() != theta.len() {
        return Err(QsimError::LengthMismatch {
            expected: x.len(),
            got: theta.len(),
        });
    }
    Ok(QRegister::from_states(
        x.iter()
            .zip(theta.iter())
            .map(|(b, h)| Bb84State::encode(b, h))
            .collect(),
    ))
}

pub fn measure<R: Rng + ?Sized>(
    reg: &mut QRegister,
    basis: &BasisString,
    rng: &mut R,
) -> Result<BitString, QsimError> {
    let bases: Vec<MeasureBasis> = basis.iter().map(MeasureBasis::from_bit).collect();
    reg.measure_in(&bases, rng)
}

pub fn to_density(reg: &QRegister) -> Result<DensityMatrix, QsimError> {
    if reg.consumed {
        return Err(QsimError::Consumed);
    }
    match &reg.contents {
        Contents::Dense(rho) => Ok(rho.clone()),
        Contents::Product(states) => {
            if states.len() > MAX_DENSE_QUBITS {
                return Err(QsimError::TooLarge(states.len()));
            }
            let mut amps = vec![Complex64::new(1.0, 0.0)];
            for s in states {
                let a = s.amplitudes();
                amps = amps.iter().flat_map(|&z| [z * a[0], z * a[1]]).collect();
            }
            DensityMatrix::from_pure(&amps)
        }
    }
}
