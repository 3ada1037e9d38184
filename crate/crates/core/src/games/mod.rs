//! Security experiments with two-stage adversaries.
//!
//! Every trial plays both challenge bits, each with its own randomness, so a
//! run of `t` trials yields `t` samples per arm. Trial `t`, arm `b` and role
//! `r` (0 challenger, 1 adversary) draw from
//! `ChaCha20Rng::seed_from_u64(seed)` on stream `(2t + b)·2 + r`, which makes
//! results independent of scheduling.
//!
//! The adversary traits only ever receive public parameters, Eve's sample,
//! oracle handles, challenge ciphertexts and (after verification) keys. The
//! oracles hold `X` privately.

pub mod builtin;
pub mod estimate;
pub mod record;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::dem::{self, DemCiphertext, DemKey, DemVariant};
use crate::demcd::{self, Certificate, DemCd, VrfyMode};
use crate::ikem::{self, IkemCapsule, IkemKey, IkemParams};
use crate::phecd::{HybridCiphertext, PhecdError, Scheme};

pub use estimate::{AdvantageEstimate, ArmCounts, RateEstimate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("adversary {adversary} does not support game {game}")]
    Incompatible { adversary: String, game: GameKind },
    #[error("unknown game {0:?}")]
    UnknownGame(String),
    #[error("unknown adversary {0:?}")]
    UnknownAdversary(String),
    #[error("adversary {adversary} cannot run here: {reason}")]
    Unsupported { adversary: String, reason: String },
    #[error(transparent)]
    Scheme(#[from] PhecdError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle budget of {0} queries exhausted")]
    BudgetExceeded(usize),
    #[error("oracle rejected the query: {0}")]
    Rejected(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameKind {
    Ikind,
    IndOtDem,
    IndQeCpa,
    EvCd,
    EvQeCd,
}

impl GameKind {
    pub const ALL: [GameKind; 5] = [
        Self::Ikind,
        Self::IndOtDem,
        Self::IndQeCpa,
        Self::EvCd,
        Self::EvQeCd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ikind => "ikind",
            Self::IndOtDem => "ind-ot-dem",
            Self::IndQeCpa => "ind-qe-cpa",
            Self::EvCd => "ev-cd",
            Self::EvQeCd => "ev-qe-cd",
        }
    }

    pub fn is_deletion(self) -> bool {
        matches!(self, Self::EvCd | Self::EvQeCd)
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameKind {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| GameError::UnknownGame(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub trials: u64,
    pub q_e: usize,
    pub seed: u64,
}

impl GameConfig {
    pub fn new(trials: u64, q_e: usize, seed: u64) -> Result<Self, GameError> {
        if trials == 0 {
            return Err(GameError::NoTrials);
        }
        Ok(Self { trials, q_e, seed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Challenger = 0,
    Adversary = 1,
}

pub fn trial_rng(seed: u64, trial: u64, arm: bool, role: Role) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream((trial * 2 + u64::from(arm)) * 2 + role as u64);
    rng
}

/// Encapsulation oracle on the challenger's `X`.
pub struct EncapOracle<'a> {
    x: &'a BitString,
    params: &'a IkemParams,
    rng: &'a mut ChaCha20Rng,
    remaining: usize,
    budget: usize,
}

impl EncapOracle<'_> {
    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn query(&mut self) -> Result<(IkemKey, IkemCapsule), OracleError> {
        if self.remaining == 0 {
            return Err(OracleError::BudgetExceeded(self.budget));
        }
        self.remaining -= 1;
        ikem::encap(self.x, self.params, self.rng).map_err(|e| OracleError::Rejected(e.to_string()))
    }
}

/// Encryption oracle on the challenger's `X`; a budget of zero disables it.
pub struct EncOracle<'a> {
    target: Option<(&'a Scheme, &'a BitString)>,
    rng: &'a mut ChaCha20Rng,
    remaining: usize,
    budget: usize,
}

impl EncOracle<'_> {
    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn query(&mut self, message: &BitString) -> Result<HybridCiphertext, OracleError> {
        let Some((scheme, x)) = self.target.filter(|_| self.remaining > 0) else {
            return Err(OracleError::BudgetExceeded(self.budget));
        };
        self.remaining -= 1;
        scheme
            .enc(x, message, self.rng)
            .map(|(_, ct)| ct)
            .map_err(|e| OracleError::Rejected(e.to_string()))
    }
}

/// The one-time DEM game grants no oracle; any query fails.
pub struct DemOracle {
    attempted: bool,
}

impl DemOracle {
    pub fn remaining(&self) -> usize {
        0
    }

    pub fn query(&mut self, _message: &BitString) -> Result<DemCiphertext, OracleError> {
        self.attempted = true;
        Err(OracleError::BudgetExceeded(0))
    }
}

pub trait IkindAdversary: Sync {
    type State;

    fn stage1(
        &self,
        params: &IkemParams,
        z: &BitString,
        oracle: &mut EncapOracle<'_>,
        rng: &mut ChaCha20Rng,
    ) -> Result<Self::State, OracleError>;

    /// Output `b′`; `false` claims the key is real.
    fn stage2(
        &self,
        params: &IkemParams,
        state: Self::State,
        capsule: &IkemCapsule,
        key: &IkemKey,
        rng: &mut ChaCha20Rng,
    ) -> bool;
}

pub trait DemAdversary: Sync {
    type State;

    fn choose(
        &self,
        variant: DemVariant,
        key_len: usize,
        oracle: &mut DemOracle,
        rng: &mut ChaCha20Rng,
    ) -> Result<(BitString, BitString, Self::State), OracleError>;

    fn guess(&self, state: Self::State, ct: &DemCiphertext, rng: &mut ChaCha20Rng) -> bool;
}

pub trait CpaAdversary: Sync {
    type State;

    fn choose(
        &self,
        scheme: &Scheme,
        z: &BitString,
        oracle: &mut EncOracle<'_>,
        rng: &mut ChaCha20Rng,
    ) -> Result<(BitString, BitString, Self::State), OracleError>;

    fn guess(
        &self,
        scheme: &Scheme,
        state: Self::State,
        ct: HybridCiphertext,
        rng: &mut ChaCha20Rng,
    ) -> bool;
}

/// What a deletion adversary knows before the challenge.
pub struct DeletionSetup<'a> {
    pub demcd: &'a DemCd,
    /// Present in the composed-scheme game only.
    pub scheme: Option<&'a Scheme>,
    pub z: Option<&'a BitString>,
}

pub trait DeletionAdversary: Sync {
    type State;

    fn choose(
        &self,
        setup: &DeletionSetup<'_>,
        oracle: &mut EncOracle<'_>,
        rng: &mut ChaCha20Rng,
    ) -> Result<(BitString, BitString, Self::State), OracleError>;

    /// Produces one certificate per message bit.
    fn delete(
        &self,
        setup: &DeletionSetup<'_>,
        state: Self::State,
        ct: HybridCiphertext,
        rng: &mut ChaCha20Rng,
    ) -> (Vec<Certificate>, Self::State);

    /// `keys` holds one DEM key per message bit when the certificates were
    /// accepted, `None` otherwise.
    fn guess(
        &self,
        setup: &DeletionSetup<'_>,
        state: Self::State,
        keys: Option<&[DemKey]>,
        rng: &mut ChaCha20Rng,
    ) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Guess { accepted: bool, guess: bool },
    Aborted,
}

impl Outcome {
    fn guess(guess: bool) -> Self {
        Self::Guess {
            accepted: true,
            guess,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmTally {
    pub trials: u64,
    pub accepted: u64,
    /// Guesses `b′ = 1` among accepted trials.
    pub ones: u64,
    pub aborted: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally([ArmTally; 2]);

impl Tally {
    fn record(&mut self, arm: bool, outcome: Outcome) {
        let t = &mut self.0[usize::from(arm)];
        t.trials += 1;
        match outcome {
            Outcome::Aborted => t.aborted += 1,
            Outcome::Guess { accepted, guess } => {
                if accepted {
                    t.accepted += 1;
                    t.ones += u64::from(guess);
                }
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            a.trials += b.trials;
            a.accepted += b.accepted;
            a.ones += b.ones;
            a.aborted += b.aborted;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub game: GameKind,
    pub trials: u64,
    pub arms: [ArmTally; 2],
    /// Over accepted trials; `None` if an arm has none.
    pub estimate: Option<AdvantageEstimate>,
    /// Certificate acceptance, pooled over both arms (deletion games only).
    pub acceptance: Option<RateEstimate>,
    pub aborted: u64,
}

impl GameResult {
    pub fn advantage(&self) -> Option<f64> {
        self.estimate.map(|e| e.advantage)
    }

    pub fn acceptance_rate(&self) -> Option<f64> {
        self.acceptance.map(|a| a.rate)
    }
}

fn run_trials<F>(kind: GameKind, cfg: &GameConfig, trial: F) -> Result<GameResult, GameError>
where
    F: Fn(&mut ChaCha20Rng, &mut ChaCha20Rng, bool) -> Outcome + Sync,
{
    if cfg.trials == 0 {
        return Err(GameError::NoTrials);
    }
    let tally = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut tally = Tally::default();
            for arm in [false, true] {
                let mut chal = trial_rng(cfg.seed, t, arm, Role::Challenger);
                let mut adv = trial_rng(cfg.seed, t, arm, Role::Adversary);
                tally.record(arm, trial(&mut chal, &mut adv, arm));
            }
            tally
        })
        .reduce(Tally::default, Tally::merge);
    let arms = tally.0;
    let counts = arms.map(|a| ArmCounts::new(a.ones, a.accepted));
    let estimate = estimate::estimate(counts[0], counts[1]).ok();
    let aborted = arms[0].aborted + arms[1].aborted;
    let acceptance = if kind.is_deletion() {
        let eligible = 2 * cfg.trials - aborted;
        estimate::rate(arms[0].accepted + arms[1].accepted, eligible).ok()
    } else {
        None
    };
    Ok(GameResult {
        game: kind,
        trials: cfg.trials,
        arms,
        estimate,
        acceptance,
        aborted,
    })
}

fn same_shape(m0: &BitString, m1: &BitString) -> bool {
    m0.len() == m1.len() && !m0.is_empty()
}

pub fn run_ikind<A: IkindAdversary>(
    params: &IkemParams,
    adversary: &A,
    cfg: &GameConfig,
) -> Result<GameResult, GameError> {
    run_trials(GameKind::Ikind, cfg, |chal, adv, arm| {
        let triple = ikem::gen(params, chal);
        let state = {
            let mut oracle = EncapOracle {
                x: &triple.x,
                params,
                rng: chal,
                remaining: cfg.q_e,
                budget: cfg.q_e,
            };
            match adversary.stage1(params, &triple.z, &mut oracle, adv) {
                Ok(st) => st,
                Err(_) => return Outcome::Aborted,
            }
        };
        let (real, capsule) = ikem::encap(&triple.x, params, chal).expect("valid sample");
        let key = if arm {
            IkemKey(BitString::random(params.key_len(), chal))
        } else {
            real
        };
        Outcome::guess(adversary.stage2(params, state, &capsule, &key, adv))
    })
}

pub fn run_ind_ot_dem<A: DemAdversary>(
    variant: DemVariant,
    key_len: usize,
    adversary: &A,
    cfg: &GameConfig,
) -> Result<GameResult, GameError> {
    run_trials(GameKind::IndOtDem, cfg, |chal, adv, arm| {
        let mut oracle = DemOracle { attempted: false };
        let Ok((m0, m1, state)) = adversary.choose(variant, key_len, &mut oracle, adv) else {
            return Outcome::Aborted;
        };
        if oracle.attempted || !same_shape(&m0, &m1) {
            return Outcome::Aborted;
        }
        let Ok(key) = dem::gen(key_len, chal) else {
            return Outcome::Aborted;
        };
        let Ok(ct) = dem::encap(variant, &key, if arm { &m1 } else { &m0 }, chal) else {
            return Outcome::Aborted;
        };
        Outcome::guess(adversary.guess(state, &ct, adv))
    })
}

pub fn run_ind_qe_cpa<A: CpaAdversary>(
    scheme: &Scheme,
    adversary: &A,
    cfg: &GameConfig,
) -> Result<GameResult, GameError> {
    run_trials(GameKind::IndQeCpa, cfg, |chal, adv, arm| {
        let triple = scheme.keygen(chal);
        let chosen = {
            let mut oracle = EncOracle {
                target: Some((scheme, &triple.x)),
                rng: chal,
                remaining: cfg.q_e,
                budget: cfg.q_e,
            };
            adversary.choose(scheme, &triple.z, &mut oracle, adv)
        };
        let Ok((m0, m1, state)) = chosen else {
            return Outcome::Aborted;
        };
        if !same_shape(&m0, &m1) {
            return Outcome::Aborted;
        }
        let Ok((_, ct)) = scheme.enc(&triple.x, if arm { &m1 } else { &m0 }, chal) else {
            return Outcome::Aborted;
        };
        Outcome::guess(adversary.guess(scheme, state, ct, adv))
    })
}

pub fn run_ev_cd<A: DeletionAdversary>(
    demcd: &DemCd,
    mode: VrfyMode,
    adversary: &A,
    cfg: &GameConfig,
) -> Result<GameResult, GameError> {
    run_trials(GameKind::EvCd, cfg, |chal, adv, arm| {
        let setup = DeletionSetup {
            demcd,
            scheme: None,
            z: None,
        };
        let chosen = {
            let mut oracle = EncOracle {
                target: None,
                rng: chal,
                remaining: 0,
                budget: 0,
            };
            adversary.choose(&setup, &mut oracle, adv)
        };
        let Ok((m0, m1, state)) = chosen else {
            return Outcome::Aborted;
        };
        if !same_shape(&m0, &m1) {
            return Outcome::Aborted;
        }
        let message = if arm { &m1 } else { &m0 };
        let Ok(key) = demcd.gen(message.len(), chal) else {
            return Outcome::Aborted;
        };
        let Ok((vks, payload)) = demcd.encap_multi(&key, message, chal) else {
            return Outcome::Aborted;
        };
        let unit_keys: Vec<DemKey> = (0..message.len())
            .map(|i| demcd.unit_key(&key, i).expect("key sized for message"))
            .collect();
        let ct = HybridCiphertext {
            capsules: Vec::new(),
            payload,
        };
        let (certs, state) = adversary.delete(&setup, state, ct, adv);
        let accepted = demcd::vrfy_all(&vks, &certs, mode).unwrap_or(false);
        let guess = adversary.guess(&setup, state, accepted.then_some(&unit_keys[..]), adv);
        Outcome::Guess { accepted, guess }
    })
}

pub fn run_ev_qe_cd<A: DeletionAdversary>(
    scheme: &Scheme,
    adversary: &A,
    cfg: &GameConfig,
) -> Result<GameResult, GameError> {
    run_trials(GameKind::EvQeCd, cfg, |chal, adv, arm| {
        let triple = scheme.keygen(chal);
        let setup = DeletionSetup {
            demcd: scheme.demcd(),
            scheme: Some(scheme),
            z: Some(&triple.z),
        };
        let chosen = {
            let mut oracle = EncOracle {
                target: Some((scheme, &triple.x)),
                rng: chal,
                remaining: cfg.q_e,
                budget: cfg.q_e,
            };
            adversary.choose(&setup, &mut oracle, adv)
        };
        let Ok((m0, m1, state)) = chosen else {
            return Outcome::Aborted;
        };
        if !same_shape(&m0, &m1) {
            return Outcome::Aborted;
        }
        let Ok(enc) = scheme.encrypt(&triple.x, if arm { &m1 } else { &m0 }, chal) else {
            return Outcome::Aborted;
        };
        let (certs, state) = adversary.delete(&setup, state, enc.ct, adv);
        let accepted = scheme.vrfy(&enc.vks, &certs).unwrap_or(false);
        let guess = adversary.guess(&setup, state, accepted.then_some(&enc.unit_keys[..]), adv);
        Outcome::Guess { accepted, guess }
    })
}

/// Fair coin for adversaries that have nothing better.
pub(crate) fn coin(rng: &mut ChaCha20Rng) -> bool {
    rng.gen()
}
