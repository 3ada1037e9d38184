//! Exact small-register analysis of deletion strategies.
//!
//! Everything here enumerates all `(x, θ)` pairs, every basis choice and every
//! outcome, so it is limited to [`MAX_ORACLE_LAMBDA`] qubits. Acceptance is
//! computed both from dense density matrices and from per-qubit products,
//! and the two are required to agree.
//!
//! The post-verification view of the adversary consists of whatever it kept
//! (outcomes, bases, or the untouched register) together with the classical
//! part and the released key. With the one-time-pad DEM, classical part plus
//! key amounts to exactly `(θ, m′)`, so that pair stands in for both. Eve's
//! correlated sample is independent of this view in the one-time DEM-CD
//! game, so omitting it does not change the distance.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::dem::DemVariant;
use crate::demcd::VrfyMode;
use crate::games::builtin::{Builtin, CertRule, QubitAction, StrategyDescriptor};
use crate::ikem::{self, IkemError, IkemParams};
use crate::qsim::{self, Bb84State, MeasureBasis, QsimError};

pub const MAX_ORACLE_LAMBDA: usize = qsim::MAX_DENSE_QUBITS;

/// Rows whose acceptance differs by less than this are ordered by name.
pub const ACCEPTANCE_TIE: f64 = 1e-12;

/// Dense and product computations must agree to this.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("lambda {0} outside 1..={MAX_ORACLE_LAMBDA}")]
    LambdaOutOfRange(usize),
    #[error("exact distance needs the one-time-pad DEM")]
    NonOtpDem,
    #[error("dense ({dense}) and product ({product}) acceptance disagree")]
    CrossCheck { dense: f64, product: f64 },
    #[error("strategy menu is empty")]
    EmptyMenu,
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Ikem(#[from] IkemError),
}

fn check_lambda(lambda: usize) -> Result<(), ExactError> {
    if (1..=MAX_ORACLE_LAMBDA).contains(&lambda) {
        Ok(())
    } else {
        Err(ExactError::LambdaOutOfRange(lambda))
    }
}

fn checked(theta_i: bool, mode: VrfyMode) -> bool {
    theta_i || mode == VrfyMode::Strict
}

/// Every basis assignment the strategy may use, with its probability.
fn basis_choices(action: QubitAction, lambda: usize) -> Vec<(Vec<MeasureBasis>, f64)> {
    match action {
        QubitAction::Measure(b) => vec![(vec![b; lambda], 1.0)],
        QubitAction::RandomBasis => (0..1usize << lambda)
            .map(|idx| {
                let bits = qsim::index_to_bits(idx, lambda);
                let bases = bits.iter().map(MeasureBasis::from_bit).collect();
                (bases, (-(lambda as f64)).exp2())
            })
            .collect(),
        QubitAction::Keep | QubitAction::Discard => Vec::new(),
    }
}

/// Probability that a certificate not derived from outcomes passes.
fn fixed_cert_acceptance(rule: CertRule, x: &BitString, theta: &BitString, mode: VrfyMode) -> f64 {
    (0..x.len())
        .filter(|&i| checked(theta.get(i), mode))
        .map(|i| match rule {
            CertRule::Zeros => f64::from(u8::from(!x.get(i))),
            _ => 0.5,
        })
        .product()
}

fn outcome_accepted(outcome: &BitString, x: &BitString, theta: &BitString, mode: VrfyMode) -> bool {
    (0..x.len()).all(|i| !checked(theta.get(i), mode) || outcome.get(i) == x.get(i))
}

fn measures(d: &StrategyDescriptor) -> bool {
    matches!(d.action, QubitAction::Measure(_) | QubitAction::RandomBasis)
}

fn all_pairs(lambda: usize) -> impl Iterator<Item = (BitString, BitString)> {
    (0..1usize << lambda).flat_map(move |xi| {
        (0..1usize << lambda).map(move |ti| {
            (qsim::index_to_bits(xi, lambda), qsim::index_to_bits(ti, lambda))
        })
    })
}

/// Acceptance averaged over uniform `(x, θ)`, by full density-matrix
/// enumeration.
pub fn dense_cert_acceptance(
    d: &StrategyDescriptor,
    lambda: usize,
    mode: VrfyMode,
) -> Result<f64, ExactError> {
    check_lambda(lambda)?;
    let weight = (-(2.0 * lambda as f64)).exp2();
    let mut total = 0.0;
    for (x, theta) in all_pairs(lambda) {
        let p = if measures(d) && d.cert == CertRule::Outcomes {
            let rho = qsim::to_density(&qsim::prepare_bb84(&x, &theta)?)?;
            let mut p = 0.0;
            for (bases, pb) in basis_choices(d.action, lambda) {
                for oi in 0..1usize << lambda {
                    let o = qsim::index_to_bits(oi, lambda);
                    if outcome_accepted(&o, &x, &theta, mode) {
                        p += pb * rho.expectation_real(&qsim::product_vector(&bases, &o));
                    }
                }
            }
            p
        } else {
            fixed_cert_acceptance(d.cert, &x, &theta, mode)
        };
        total += weight * p;
    }
    Ok(total)
}

/// Acceptance as a product of per-qubit averages.
pub fn product_cert_acceptance(
    d: &StrategyDescriptor,
    lambda: usize,
    mode: VrfyMode,
) -> Result<f64, ExactError> {
    check_lambda(lambda)?;
    let per_qubit = {
        let mut acc = 0.0;
        for x in [false, true] {
            for h in [false, true] {
                let p = if !checked(h, mode) {
                    1.0
                } else if measures(d) && d.cert == CertRule::Outcomes {
                    let state = Bb84State::encode(x, h);
                    basis_choices(d.action, 1)
                        .iter()
                        .map(|(b, pb)| {
                            let p0 = state.prob_zero(b[0]);
                            pb * if x { 1.0 - p0 } else { p0 }
                        })
                        .sum()
                } else {
                    match d.cert {
                        CertRule::Zeros => f64::from(u8::from(!x)),
                        _ => 0.5,
                    }
                };
                acc += 0.25 * p;
            }
        }
        acc
    };
    Ok(per_qubit.powi(lambda as i32))
}

/// Exact acceptance probability, cross-checked between the dense and product
/// computations.
pub fn exact_cert_acceptance(
    d: &StrategyDescriptor,
    lambda: usize,
    mode: VrfyMode,
) -> Result<f64, ExactError> {
    let dense = dense_cert_acceptance(d, lambda, mode)?;
    let product = product_cert_acceptance(d, lambda, mode)?;
    if (dense - product).abs() > CROSS_CHECK_TOLERANCE {
        return Err(ExactError::CrossCheck { dense, product });
    }
    Ok(dense)
}

type View = Vec<u8>;

fn push_bits(key: &mut View, bits: &BitString) {
    key.extend(bits.iter().map(u8::from));
}

fn scalar(v: f64) -> DMatrix<Complex64> {
    DMatrix::from_element(1, 1, Complex64::new(v, 0.0))
}

fn accumulate(views: &mut BTreeMap<View, [DMatrix<Complex64>; 2]>, key: View, arm: usize, m: DMatrix<Complex64>) {
    let entry = views.entry(key).or_insert_with(|| {
        let zero = DMatrix::zeros(m.nrows(), m.ncols());
        [zero.clone(), zero]
    });
    entry[arm] += m;
}

/// Exact trace distance between the two arms' post-verification states,
/// conditioned on acceptance. Returns 0 when acceptance is 0.
pub fn exact_post_verification_distance(
    d: &StrategyDescriptor,
    lambda: usize,
    mode: VrfyMode,
    dem: DemVariant,
) -> Result<f64, ExactError> {
    check_lambda(lambda)?;
    if dem != DemVariant::Otp {
        return Err(ExactError::NonOtpDem);
    }
    let weight = (-(2.0 * lambda as f64)).exp2();
    let mut views: BTreeMap<View, [DMatrix<Complex64>; 2]> = BTreeMap::new();
    let mut accepted = 0.0;
    for (x, theta) in all_pairs(lambda) {
        let parity = x.parity_where(&theta, false).expect("equal lengths");
        let rho = qsim::to_density(&qsim::prepare_bb84(&x, &theta)?)?;
        for arm in 0..2 {
            let mut base = Vec::new();
            if d.retains_cpart {
                push_bits(&mut base, &theta);
                base.push(u8::from((arm == 1) ^ parity));
            }
            if measures(d) {
                for (bi, (bases, pb)) in basis_choices(d.action, lambda).into_iter().enumerate() {
                    for oi in 0..1usize << lambda {
                        let o = qsim::index_to_bits(oi, lambda);
                        let p_acc = match d.cert {
                            CertRule::Outcomes => {
                                f64::from(u8::from(outcome_accepted(&o, &x, &theta, mode)))
                            }
                            rule => fixed_cert_acceptance(rule, &x, &theta, mode),
                        };
                        let p = weight
                            * pb
                            * p_acc
                            * rho.expectation_real(&qsim::product_vector(&bases, &o));
                        if p == 0.0 {
                            continue;
                        }
                        if arm == 0 {
                            accepted += p;
                        }
                        let mut key = base.clone();
                        key.extend((bi as u32).to_le_bytes());
                        push_bits(&mut key, &o);
                        accumulate(&mut views, key, arm, scalar(p));
                    }
                }
            } else {
                let p = weight * fixed_cert_acceptance(d.cert, &x, &theta, mode);
                if p == 0.0 {
                    continue;
                }
                if arm == 0 {
                    accepted += p;
                }
                let memory = match d.action {
                    QubitAction::Keep => rho.matrix() * Complex64::new(p, 0.0),
                    _ => scalar(p),
                };
                accumulate(&mut views, base, arm, memory);
            }
        }
    }
    if accepted <= 0.0 {
        return Ok(0.0);
    }
    let joint: f64 = views
        .values()
        .map(|[a, b]| qsim::trace_norm(&(a - b)))
        .sum::<f64>()
        / 2.0;
    Ok((joint / accepted).clamp(0.0, 1.0))
}

/// Alias for [`ikem::exact_key_distance`].
pub fn exact_ikem_sd(params: &IkemParams) -> Result<f64, ExactError> {
    Ok(ikem::exact_key_distance(params)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub strategy: String,
    pub lambda: usize,
    pub acceptance: f64,
    /// Conditional on acceptance.
    pub distance: f64,
}

/// The built-in deletion strategies with their register behaviour.
pub fn builtin_menu() -> Vec<(String, StrategyDescriptor)> {
    Builtin::DELETION_STRATEGIES
        .iter()
        .filter_map(|b| Some((b.name().to_string(), b.descriptor()?)))
        .collect()
}

pub fn tradeoff_table(
    lambda: usize,
    menu: &[(String, StrategyDescriptor)],
    mode: VrfyMode,
) -> Result<Vec<TradeoffRow>, ExactError> {
    check_lambda(lambda)?;
    if menu.is_empty() {
        return Err(ExactError::EmptyMenu);
    }
    let mut rows = menu
        .iter()
        .map(|(name, d)| {
            Ok(TradeoffRow {
                strategy: name.clone(),
                lambda,
                acceptance: exact_cert_acceptance(d, lambda, mode)?,
                distance: exact_post_verification_distance(d, lambda, mode, DemVariant::Otp)?,
            })
        })
        .collect::<Result<Vec<_>, ExactError>>()?;
    let rounded = |v: f64| (v / ACCEPTANCE_TIE).round() as i64;
    rows.sort_by(|a, b| {
        rounded(b.acceptance)
            .cmp(&rounded(a.acceptance))
            .then_with(|| a.strategy.cmp(&b.strategy))
    });
    Ok(rows)
}

/// File name of the golden table for `lambda`.
pub fn golden_file_name(lambda: usize) -> String {
    format!("tradeoff_lambda{lambda}.json")
}

/// Pretty JSON of a table with a trailing newline.
pub fn table_json(rows: &[TradeoffRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialise");
    s.push('\n');
    s
}

pub fn write_table_csv<W: std::io::Write>(rows: &[TradeoffRow], out: W) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    for r in rows {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes the golden tables for every oracle-sized `λ` into `dir`.
pub fn regenerate_golden(dir: &Path, mode: VrfyMode) -> Result<Vec<std::path::PathBuf>, GoldenError> {
    std::fs::create_dir_all(dir)?;
    let menu = builtin_menu();
    let mut written = Vec::new();
    for lambda in 1..=MAX_ORACLE_LAMBDA {
        let path = dir.join(golden_file_name(lambda));
        std::fs::write(&path, table_json(&tradeoff_table(lambda, &menu, mode)?))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Error)]
pub enum GoldenError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Exact(#[from] ExactError),
}
