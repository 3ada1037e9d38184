//! Catalogue of built-in adversaries.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{
    coin, CpaAdversary, DeletionAdversary, DeletionSetup, DemAdversary, DemOracle, EncOracle,
    EncapOracle, GameConfig, GameError, GameKind, GameResult, IkindAdversary, OracleError,
};
use crate::bits::BitString;
use crate::dem::{self, DemCiphertext, DemKey, DemVariant};
use crate::demcd::{Certificate, DemCd};
use crate::ikem::{self, IkemCapsule, IkemKey, IkemParams, MAX_POSTERIOR_N};
use crate::phecd::{self, CapsuleMode, HybridCiphertext, Scheme};
use crate::qsim::{MeasureBasis, QRegister};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    HonestDeleter,
    HadamardRetain,
    MeasureComputational,
    Breidbart,
    InterceptResend,
    KeepRegisterForge,
    RandomCert,
    RandomGuess,
    EveKnowsX,
    BayesKey,
    ConstantOne,
    BitFrequency,
    XorCorrelation,
}

impl Builtin {
    pub const ALL: [Builtin; 13] = [
        Self::HonestDeleter,
        Self::HadamardRetain,
        Self::MeasureComputational,
        Self::Breidbart,
        Self::InterceptResend,
        Self::KeepRegisterForge,
        Self::RandomCert,
        Self::RandomGuess,
        Self::EveKnowsX,
        Self::BayesKey,
        Self::ConstantOne,
        Self::BitFrequency,
        Self::XorCorrelation,
    ];

    /// Strategies that act on the quantum register without any key material.
    pub const DELETION_STRATEGIES: [Builtin; 7] = [
        Self::HonestDeleter,
        Self::HadamardRetain,
        Self::MeasureComputational,
        Self::Breidbart,
        Self::InterceptResend,
        Self::KeepRegisterForge,
        Self::RandomCert,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::HonestDeleter => "honest-deleter",
            Self::HadamardRetain => "hadamard-retain",
            Self::MeasureComputational => "measure-computational",
            Self::Breidbart => "breidbart",
            Self::InterceptResend => "intercept-resend",
            Self::KeepRegisterForge => "keep-register-forge",
            Self::RandomCert => "random-cert",
            Self::RandomGuess => "random-guess",
            Self::EveKnowsX => "eve-knows-x",
            Self::BayesKey => "bayes-key",
            Self::ConstantOne => "constant-one",
            Self::BitFrequency => "bit-frequency",
            Self::XorCorrelation => "xor-correlation",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Self::HonestDeleter => "deletes honestly and forgets the classical part",
            Self::HadamardRetain => "deletes honestly but keeps the classical part",
            Self::MeasureComputational => "measures every qubit in the computational basis",
            Self::Breidbart => "measures every qubit in the intermediate basis",
            Self::InterceptResend => "measures each qubit in a random BB84 basis",
            Self::KeepRegisterForge => "keeps the register and submits an all-zero certificate",
            Self::RandomCert => "discards the register and submits a uniformly random certificate",
            Self::RandomGuess => "queries passively and flips a coin",
            Self::EveKnowsX => "uses Eve's correlated sample as if it were the sender's",
            Self::BayesKey => "computes the exact key posterior from Eve's view",
            Self::ConstantOne => "always answers 1",
            Self::BitFrequency => "all-zero versus all-one messages, majority vote",
            Self::XorCorrelation => "all-zero versus alternating messages, adjacent-pair count",
        }
    }

    pub fn supports(self, game: GameKind) -> bool {
        use GameKind::*;
        match self {
            Self::RandomGuess => true,
            Self::EveKnowsX => matches!(game, Ikind | IndQeCpa | EvQeCd),
            Self::BayesKey => game == Ikind,
            Self::ConstantOne => matches!(game, Ikind | IndOtDem | IndQeCpa),
            Self::BitFrequency | Self::XorCorrelation => matches!(game, IndOtDem | IndQeCpa),
            _ => game.is_deletion(),
        }
    }

    /// Register behaviour for strategies that need no key material.
    pub fn descriptor(self) -> Option<StrategyDescriptor> {
        use CertRule::Outcomes;
        let d = |action, cert, retains_cpart| StrategyDescriptor {
            action,
            cert,
            retains_cpart,
        };
        Some(match self {
            Self::HonestDeleter => d(QubitAction::Measure(MeasureBasis::Hadamard), Outcomes, false),
            Self::HadamardRetain => d(QubitAction::Measure(MeasureBasis::Hadamard), Outcomes, true),
            Self::MeasureComputational => {
                d(QubitAction::Measure(MeasureBasis::Computational), Outcomes, true)
            }
            Self::Breidbart => d(QubitAction::Measure(MeasureBasis::Breidbart), Outcomes, true),
            Self::InterceptResend => d(QubitAction::RandomBasis, Outcomes, true),
            Self::KeepRegisterForge => d(QubitAction::Keep, CertRule::Zeros, true),
            Self::RandomCert => d(QubitAction::Discard, CertRule::Random, true),
            _ => return None,
        })
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| GameError::UnknownAdversary(s.to_string()))
    }
}

/// What a deletion strategy does with each qubit before certifying.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QubitAction {
    Measure(MeasureBasis),
    /// Computational or Hadamard, uniformly and independently per qubit.
    RandomBasis,
    /// Hold the register until the key arrives, then measure in the true bases.
    Keep,
    Discard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertRule {
    /// Submit the measurement outcomes.
    Outcomes,
    Zeros,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyDescriptor {
    pub action: QubitAction,
    pub cert: CertRule,
    pub retains_cpart: bool,
}

/// Guess for `m` from `m′ ⊕ ⊕_{θ_i = 0} x_i` given outcomes measured in
/// `bases`. Positions with `θ_i = 0` measured in the Hadamard basis carry no
/// information, in which case the guess is `false`.
pub fn parity_guess(
    theta: &BitString,
    masked: bool,
    outcomes: &BitString,
    bases: &[MeasureBasis],
) -> bool {
    let mut parity = false;
    for i in (0..theta.len()).filter(|&i| !theta.get(i)) {
        if computational_bias(bases[i]) <= 0.0 {
            return false;
        }
        parity ^= outcomes.get(i);
    }
    masked ^ parity
}

/// `2·Pr[outcome = x] − 1` for a computational-basis qubit.
pub fn computational_bias(basis: MeasureBasis) -> f64 {
    match basis {
        MeasureBasis::Computational => 1.0,
        MeasureBasis::Hadamard => 0.0,
        MeasureBasis::Breidbart => FRAC_1_SQRT_2,
    }
}

/// DEM keys Eve derives from her own sample, one per message bit.
pub fn keys_from_sample(
    scheme: &Scheme,
    z: &BitString,
    ct: &HybridCiphertext,
) -> Option<Vec<DemKey>> {
    let bits = ct.payload.len();
    let derive = |c: &IkemCapsule| ikem::recompute_key(z, c, scheme.ikem()).ok();
    let demcd = scheme.demcd();
    match scheme.config().capsule_mode {
        CapsuleMode::PerMessage => {
            let key = phecd::dem_key(&derive(ct.capsules.first()?)?);
            (0..bits).map(|i| demcd.unit_key(&key, i).ok()).collect()
        }
        CapsuleMode::PerBit => ct
            .capsules
            .iter()
            .map(|c| demcd.unit_key(&phecd::dem_key(&derive(c)?), 0).ok())
            .collect(),
    }
}

fn decrypt_record(demcd: &DemCd, key: &DemKey, cpart: &DemCiphertext) -> Option<(BitString, bool)> {
    let record = dem::decap(key, cpart)?;
    let lambda = demcd.lambda();
    (record.len() == lambda + 1).then(|| (record.slice(0..lambda), record.get(lambda)))
}

fn single_bits() -> (BitString, BitString) {
    (BitString::zeros(1), BitString::ones(1))
}

fn passive_encrypt(oracle: &mut EncOracle<'_>) -> Result<(), OracleError> {
    while oracle.remaining() > 0 {
        oracle.query(&BitString::zeros(1))?;
    }
    Ok(())
}

/// Battery message length: up to 8 bits, capped by what the scheme accepts.
fn battery_len(max_bits: Option<usize>) -> usize {
    max_bits.map_or(8, |m| m.min(8))
}

fn battery_messages(kind: Builtin, len: usize) -> (BitString, BitString) {
    let m1 = match kind {
        Builtin::XorCorrelation => (0..len).map(|i| i % 2 == 1).collect(),
        _ => BitString::ones(len),
    };
    (BitString::zeros(len), m1)
}

fn battery_guess(kind: Builtin, observed: &BitString) -> bool {
    let len = observed.len();
    match kind {
        Builtin::XorCorrelation => {
            let equal = (1..len)
                .filter(|&i| observed.get(i) == observed.get(i - 1))
                .count();
            2 * equal < len.saturating_sub(1)
        }
        _ => 2 * observed.weight() > len,
    }
}

fn hybrid_payload_bits(ct: &HybridCiphertext) -> BitString {
    ct.payload
        .iter()
        .fold(BitString::default(), |acc, c| acc.concat(&c.cpart.payload))
}

/// A built-in adversary bound to its strategy.
#[derive(Debug, Clone, Copy)]
pub struct BuiltinAdversary(pub Builtin);

pub enum IkindMemory {
    Nothing,
    Sample(BitString),
    View {
        z: BitString,
        side: Vec<(IkemKey, IkemCapsule)>,
    },
}

impl IkindAdversary for BuiltinAdversary {
    type State = IkindMemory;

    fn stage1(
        &self,
        _params: &IkemParams,
        z: &BitString,
        oracle: &mut EncapOracle<'_>,
        _rng: &mut ChaCha20Rng,
    ) -> Result<IkindMemory, OracleError> {
        match self.0 {
            Builtin::RandomGuess => {
                while oracle.remaining() > 0 {
                    oracle.query()?;
                }
                Ok(IkindMemory::Nothing)
            }
            Builtin::EveKnowsX => Ok(IkindMemory::Sample(z.clone())),
            Builtin::BayesKey => {
                let mut side = Vec::with_capacity(oracle.remaining());
                while oracle.remaining() > 0 {
                    side.push(oracle.query()?);
                }
                Ok(IkindMemory::View { z: z.clone(), side })
            }
            _ => Ok(IkindMemory::Nothing),
        }
    }

    fn stage2(
        &self,
        params: &IkemParams,
        state: IkindMemory,
        capsule: &IkemCapsule,
        key: &IkemKey,
        rng: &mut ChaCha20Rng,
    ) -> bool {
        match (self.0, state) {
            (Builtin::ConstantOne, _) => true,
            (_, IkindMemory::Sample(z)) => ikem::recompute_key(&z, capsule, params)
                .map_or_else(|_| coin(rng), |candidate| candidate != *key),
            (_, IkindMemory::View { z, side }) => {
                match ikem::key_posterior(&z, capsule, &side, params) {
                    Ok(post) => {
                        let uniform = (-(params.key_len() as f64)).exp2();
                        post[key.0.to_u64() as usize] <= uniform
                    }
                    Err(_) => coin(rng),
                }
            }
            _ => coin(rng),
        }
    }
}

impl DemAdversary for BuiltinAdversary {
    type State = ();

    fn choose(
        &self,
        variant: DemVariant,
        key_len: usize,
        _oracle: &mut DemOracle,
        _rng: &mut ChaCha20Rng,
    ) -> Result<(BitString, BitString, ()), OracleError> {
        let max = match variant {
            DemVariant::Otp => Some(key_len),
            DemVariant::Stream => None,
        };
        let (m0, m1) = match self.0 {
            Builtin::BitFrequency | Builtin::XorCorrelation => {
                battery_messages(self.0, battery_len(max))
            }
            _ => single_bits(),
        };
        Ok((m0, m1, ()))
    }

    fn guess(&self, _state: (), ct: &DemCiphertext, rng: &mut ChaCha20Rng) -> bool {
        match self.0 {
            Builtin::ConstantOne => true,
            Builtin::BitFrequency | Builtin::XorCorrelation => battery_guess(self.0, &ct.payload),
            _ => coin(rng),
        }
    }
}

pub enum CpaMemory {
    Nothing,
    Sample(BitString),
}

impl CpaAdversary for BuiltinAdversary {
    type State = CpaMemory;

    fn choose(
        &self,
        scheme: &Scheme,
        z: &BitString,
        oracle: &mut EncOracle<'_>,
        _rng: &mut ChaCha20Rng,
    ) -> Result<(BitString, BitString, CpaMemory), OracleError> {
        let (m0, m1) = match self.0 {
            Builtin::BitFrequency | Builtin::XorCorrelation => {
                battery_messages(self.0, battery_len(scheme.max_message_bits()))
            }
            _ => single_bits(),
        };
        let memory = match self.0 {
            Builtin::RandomGuess => {
                passive_encrypt(oracle)?;
                CpaMemory::Nothing
            }
            Builtin::EveKnowsX => CpaMemory::Sample(z.clone()),
            _ => CpaMemory::Nothing,
        };
        Ok((m0, m1, memory))
    }

    fn guess(
        &self,
        scheme: &Scheme,
        state: CpaMemory,
        mut ct: HybridCiphertext,
        rng: &mut ChaCha20Rng,
    ) -> bool {
        match (self.0, state) {
            (Builtin::ConstantOne, _) => true,
            (Builtin::BitFrequency | Builtin::XorCorrelation, _) => {
                battery_guess(self.0, &hybrid_payload_bits(&ct))
            }
            (_, CpaMemory::Sample(z)) => {
                let Some(keys) = keys_from_sample(scheme, &z, &ct) else {
                    return coin(rng);
                };
                match scheme.demcd().decap(&keys[0], &mut ct.payload[0], rng) {
                    Ok(Some(bit)) => bit,
                    _ => coin(rng),
                }
            }
            _ => coin(rng),
        }
    }
}

/// What a deletion adversary carries from the deletion phase to the guess.
pub struct CdMemory {
    cpart: Option<DemCiphertext>,
    register: Option<QRegister>,
    outcomes: Option<(BitString, Vec<MeasureBasis>)>,
    /// Eve's own decryption `(θ′, m′)`.
    eve: Option<(BitString, bool)>,
}

impl CdMemory {
    fn empty() -> Self {
        Self {
            cpart: None,
            register: None,
            outcomes: None,
            eve: None,
        }
    }
}

impl BuiltinAdversary {
    fn delete_with(
        &self,
        descriptor: StrategyDescriptor,
        ct: HybridCiphertext,
        rng: &mut ChaCha20Rng,
    ) -> (Vec<Certificate>, CdMemory) {
        let mut memory = CdMemory::empty();
        let Some(mut unit) = ct.payload.into_iter().next() else {
            return (Vec::new(), memory);
        };
        let lambda = unit.qpart.num_qubits();
        let bases: Option<Vec<MeasureBasis>> = match descriptor.action {
            QubitAction::Measure(b) => Some(vec![b; lambda]),
            QubitAction::RandomBasis => Some(
                (0..lambda)
                    .map(|_| MeasureBasis::from_bit(rng.gen()))
                    .collect(),
            ),
            QubitAction::Keep | QubitAction::Discard => None,
        };
        let mut outcomes = None;
        if let Some(bases) = bases {
            if let Ok(o) = unit.qpart.measure_in(&bases, rng) {
                outcomes = Some((o, bases));
            }
        } else if descriptor.action == QubitAction::Keep {
            memory.register = Some(unit.qpart);
        }
        let cert = match (descriptor.cert, &outcomes) {
            (CertRule::Outcomes, Some((o, _))) => o.clone(),
            (CertRule::Zeros, _) => BitString::zeros(lambda),
            _ => BitString::random(lambda, rng),
        };
        memory.outcomes = outcomes;
        if descriptor.retains_cpart {
            memory.cpart = Some(unit.cpart);
        }
        (vec![Certificate(cert)], memory)
    }
}

impl DeletionAdversary for BuiltinAdversary {
    type State = CdMemory;

    fn choose(
        &self,
        _setup: &DeletionSetup<'_>,
        oracle: &mut EncOracle<'_>,
        _rng: &mut ChaCha20Rng,
    ) -> Result<(BitString, BitString, CdMemory), OracleError> {
        if self.0 == Builtin::RandomGuess {
            passive_encrypt(oracle)?;
        }
        let (m0, m1) = single_bits();
        Ok((m0, m1, CdMemory::empty()))
    }

    fn delete(
        &self,
        setup: &DeletionSetup<'_>,
        _state: CdMemory,
        mut ct: HybridCiphertext,
        rng: &mut ChaCha20Rng,
    ) -> (Vec<Certificate>, CdMemory) {
        if let Some(descriptor) = self.0.descriptor() {
            return self.delete_with(descriptor, ct, rng);
        }
        if self.0 == Builtin::EveKnowsX {
            if let (Some(scheme), Some(z)) = (setup.scheme, setup.z) {
                let record = keys_from_sample(scheme, z, &ct)
                    .and_then(|keys| decrypt_record(setup.demcd, &keys[0], &ct.payload[0].cpart));
                if let Some((theta, masked)) = record {
                    let bases: Vec<MeasureBasis> =
                        theta.iter().map(MeasureBasis::from_bit).collect();
                    if let Ok(o) = ct.payload[0].qpart.measure_in(&bases, rng) {
                        let mut memory = CdMemory::empty();
                        memory.outcomes = Some((o.clone(), bases));
                        memory.eve = Some((theta, masked));
                        return (vec![Certificate(o)], memory);
                    }
                }
            }
        }
        let certs = setup
            .demcd
            .del_multi(&mut ct.payload, rng)
            .unwrap_or_default();
        (certs, CdMemory::empty())
    }

    fn guess(
        &self,
        setup: &DeletionSetup<'_>,
        state: CdMemory,
        keys: Option<&[DemKey]>,
        rng: &mut ChaCha20Rng,
    ) -> bool {
        if self.0 == Builtin::RandomGuess {
            return coin(rng);
        }
        if let (Some((theta, masked)), Some((outcomes, _))) = (&state.eve, &state.outcomes) {
            let bases: Vec<MeasureBasis> = theta.iter().map(MeasureBasis::from_bit).collect();
            return parity_guess(theta, *masked, outcomes, &bases);
        }
        let (Some(keys), Some(cpart)) = (keys, &state.cpart) else {
            return false;
        };
        let Some((theta, masked)) = decrypt_record(setup.demcd, &keys[0], cpart) else {
            return false;
        };
        let measured = match state.register {
            Some(mut register) => {
                let bases: Vec<MeasureBasis> = theta.iter().map(MeasureBasis::from_bit).collect();
                register.measure_in(&bases, rng).ok().map(|o| (o, bases))
            }
            None => state.outcomes,
        };
        let (outcomes, bases) = measured.unwrap_or_else(|| {
            (BitString::zeros(theta.len()), vec![MeasureBasis::Hadamard; theta.len()])
        });
        parity_guess(&theta, masked, &outcomes, &bases)
    }
}

/// Runs `adversary` in `game` against `scheme`.
pub fn run(
    game: GameKind,
    adversary: Builtin,
    scheme: &Scheme,
    cfg: &GameConfig,
) -> Result<GameResult, GameError> {
    if !adversary.supports(game) {
        return Err(GameError::Incompatible {
            adversary: adversary.name().into(),
            game,
        });
    }
    let params = scheme.ikem();
    if adversary == Builtin::BayesKey && (params.n() > MAX_POSTERIOR_N || params.key_len() > MAX_POSTERIOR_N) {
        return Err(GameError::Unsupported {
            adversary: adversary.name().into(),
            reason: format!("needs n and key length at most {MAX_POSTERIOR_N}"),
        });
    }
    let adv = BuiltinAdversary(adversary);
    match game {
        GameKind::Ikind => super::run_ikind(params, &adv, cfg),
        GameKind::IndOtDem => {
            super::run_ind_ot_dem(scheme.config().dem, params.key_len(), &adv, cfg)
        }
        GameKind::IndQeCpa => super::run_ind_qe_cpa(scheme, &adv, cfg),
        GameKind::EvCd => super::run_ev_cd(scheme.demcd(), scheme.vrfy_mode(), &adv, cfg),
        GameKind::EvQeCd => super::run_ev_qe_cd(scheme, &adv, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phecd::SchemeConfig;

    fn game_scheme(dem: DemVariant, lambda: usize) -> Scheme {
        Scheme::new(SchemeConfig::game(dem, lambda)).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for a in Builtin::ALL {
            assert_eq!(a.name().parse::<Builtin>().unwrap(), a);
        }
        for g in GameKind::ALL {
            assert_eq!(g.name().parse::<GameKind>().unwrap(), g);
        }
        assert!("nobody".parse::<Builtin>().is_err());
    }

    #[test]
    fn random_guess_supports_everything() {
        assert!(GameKind::ALL.iter().all(|&g| Builtin::RandomGuess.supports(g)));
        assert!(!Builtin::Breidbart.supports(GameKind::Ikind));
        assert!(!Builtin::BayesKey.supports(GameKind::IndQeCpa));
    }

    #[test]
    fn incompatible_pairs_are_rejected() {
        let scheme = game_scheme(DemVariant::Otp, 2);
        let cfg = GameConfig::new(4, 0, 1).unwrap();
        let err = run(GameKind::Ikind, Builtin::Breidbart, &scheme, &cfg).unwrap_err();
        assert!(matches!(err, GameError::Incompatible { .. }));
        let err = run(GameKind::Ikind, Builtin::BayesKey, &scheme, &cfg).unwrap_err();
        assert!(matches!(err, GameError::Unsupported { .. }));
    }

    #[test]
    fn parity_guess_examples() {
        use MeasureBasis::*;
        let theta: BitString = "010".parse().unwrap();
        let outcomes: BitString = "110".parse().unwrap();
        assert!(parity_guess(&theta, false, &outcomes, &[Computational; 3]));
        assert!(!parity_guess(&theta, true, &outcomes, &[Computational; 3]));
        assert!(!parity_guess(&theta, true, &outcomes, &[Computational, Computational, Hadamard]));
        let all_h: BitString = "111".parse().unwrap();
        assert!(parity_guess(&all_h, true, &outcomes, &[Hadamard; 3]));
    }

    #[test]
    fn battery_guesses_separate_plaintexts() {
        for kind in [Builtin::BitFrequency, Builtin::XorCorrelation] {
            let (m0, m1) = battery_messages(kind, 8);
            assert!(!battery_guess(kind, &m0));
            assert!(battery_guess(kind, &m1));
        }
    }

    #[test]
    fn honest_deleter_is_accepted_and_blind() {
        let scheme = game_scheme(DemVariant::Otp, 4);
        let cfg = GameConfig::new(200, 0, 3).unwrap();
        let r = run(GameKind::EvCd, Builtin::HonestDeleter, &scheme, &cfg).unwrap();
        assert_eq!(r.acceptance_rate(), Some(1.0));
        assert_eq!(r.advantage(), Some(0.0));
    }

    #[test]
    fn keep_register_wins_when_accepted() {
        let scheme = game_scheme(DemVariant::Otp, 2);
        let cfg = GameConfig::new(400, 0, 5).unwrap();
        let r = run(GameKind::EvCd, Builtin::KeepRegisterForge, &scheme, &cfg).unwrap();
        assert_eq!(r.advantage(), Some(1.0));
        let acc = r.acceptance.unwrap();
        assert!(acc.ci.contains(0.5625), "{acc:?}");
    }

    #[test]
    fn runs_are_deterministic() {
        let scheme = game_scheme(DemVariant::Stream, 3);
        let cfg = GameConfig::new(64, 2, 11).unwrap();
        let a = run(GameKind::EvQeCd, Builtin::RandomGuess, &scheme, &cfg).unwrap();
        let b = run(GameKind::EvQeCd, Builtin::RandomGuess, &scheme, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_is_enforced() {
        struct Greedy;
        impl IkindAdversary for Greedy {
            type State = ();
            fn stage1(
                &self,
                _: &IkemParams,
                _: &BitString,
                oracle: &mut EncapOracle<'_>,
                _: &mut ChaCha20Rng,
            ) -> Result<(), OracleError> {
                for _ in 0..=oracle.remaining() {
                    oracle.query()?;
                }
                Ok(())
            }
            fn stage2(
                &self,
                _: &IkemParams,
                _: (),
                _: &IkemCapsule,
                _: &IkemKey,
                _: &mut ChaCha20Rng,
            ) -> bool {
                true
            }
        }
        let params = IkemParams::new(crate::ikem::IkemConfig::tiny(0.25)).unwrap();
        let cfg = GameConfig::new(10, 3, 0).unwrap();
        let r = super::super::run_ikind(&params, &Greedy, &cfg).unwrap();
        assert_eq!(r.aborted, 20);
        assert!(r.estimate.is_none());
    }
}
