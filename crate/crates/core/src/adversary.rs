//! Eavesdropping strategies acting on multiplets in transit.
//!
//! Eve replaces the fiber with a perfect one, so whatever she forwards
//! reaches Bob without polarization noise. Each strategy returns a record of
//! what she measured so her knowledge can be accounted for exactly.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::MultipletPayload;
use crate::codewords::CodewordPair;
use crate::decoder::{classify, BasisChoice, Classification};
use crate::qmath::{measure_product_basis, Outcome, QuantumState, State, StateVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("the discrimination attack needs the codeword pair before the multiplet is sent")]
    PairUnknown,
    #[error("unknown attack {0:?}")]
    UnknownAttack(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisPolicy {
    Rectilinear,
    Diagonal,
    PerRoundRandom,
}

impl BasisPolicy {
    pub fn choose<R: Rng + ?Sized>(self, rng: &mut R) -> BasisChoice {
        match self {
            BasisPolicy::Rectilinear => BasisChoice::Rectilinear,
            BasisPolicy::Diagonal => BasisChoice::Diagonal,
            BasisPolicy::PerRoundRandom => BasisChoice::random(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    None,
    InterceptResend(BasisPolicy),
    /// Discriminate the announced pair and drop inconclusive multiplets.
    Usd,
    /// The same discrimination against a guessed pair.
    PairGuessUsd,
}

impl AttackKind {
    pub const NAMES: [&'static str; 6] = [
        "none",
        "intercept_resend_rectilinear",
        "intercept_resend_diagonal",
        "intercept_resend_random",
        "usd",
        "pair_guess_usd",
    ];
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AttackKind::None => Self::NAMES[0],
            AttackKind::InterceptResend(BasisPolicy::Rectilinear) => Self::NAMES[1],
            AttackKind::InterceptResend(BasisPolicy::Diagonal) => Self::NAMES[2],
            AttackKind::InterceptResend(BasisPolicy::PerRoundRandom) => Self::NAMES[3],
            AttackKind::Usd => Self::NAMES[4],
            AttackKind::PairGuessUsd => Self::NAMES[5],
        };
        f.write_str(name)
    }
}

impl FromStr for AttackKind {
    type Err = AttackError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "none" => AttackKind::None,
            "intercept_resend_rectilinear" => AttackKind::InterceptResend(BasisPolicy::Rectilinear),
            "intercept_resend_diagonal" => AttackKind::InterceptResend(BasisPolicy::Diagonal),
            "intercept_resend_random" | "intercept_resend" => {
                AttackKind::InterceptResend(BasisPolicy::PerRoundRandom)
            }
            "usd" | "usd_attack" => AttackKind::Usd,
            "pair_guess_usd" => AttackKind::PairGuessUsd,
            other => return Err(AttackError::UnknownAttack(other.to_string())),
        })
    }
}

/// What Eve did to one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveRecord {
    pub round_id: u64,
    pub basis: Option<BasisChoice>,
    pub outcome: Option<Outcome>,
    /// The pair Eve discriminated against: known or guessed.
    pub assumed_pair: Option<CodewordPair>,
    /// Bit Eve inferred under `assumed_pair`.
    pub inferred_bit: Option<u8>,
    pub suppressed: bool,
}

impl EveRecord {
    fn passive(round_id: u64) -> Self {
        Self {
            round_id,
            basis: None,
            outcome: None,
            assumed_pair: None,
            inferred_bit: None,
            suppressed: false,
        }
    }

    /// The key bit Eve knows with certainty once the true pair is public.
    ///
    /// Her outcome comes from a product measurement of Alice's unmodified
    /// codeword, so a conclusive verdict under the true pair is error-free.
    pub fn certain_bit(&self, true_pair: &CodewordPair) -> Option<u8> {
        let outcome = self.outcome?;
        classify(&outcome, true_pair).ok()?.bit()
    }
}

fn product_state(outcome: Outcome, basis: BasisChoice) -> State {
    let n = outcome.len();
    let computational = StateVector::basis_state(n, outcome.value()).expect("outcome fits");
    State::Pure(
        computational
            .apply_local(&vec![basis.as_unitary(); n])
            .expect("one operator per photon"),
    )
}

/// Measure every photon in a common basis and resend the product state found.
pub fn intercept_resend<R: Rng + ?Sized>(
    payload: MultipletPayload,
    policy: BasisPolicy,
    rng: &mut R,
) -> (MultipletPayload, EveRecord) {
    let round_id = payload.round_id();
    let Some(state) = payload.state().filter(|_| payload.is_complete()) else {
        return (payload, EveRecord::passive(round_id));
    };
    let basis = policy.choose(rng);
    let outcome = measure_product_basis(state, &basis.as_unitary(), rng);
    let record = EveRecord {
        round_id,
        basis: Some(basis),
        outcome: Some(outcome),
        ..EveRecord::passive(round_id)
    };
    (MultipletPayload::new(product_state(outcome, basis), round_id), record)
}

/// Discriminate against `pair` in the rectilinear basis. Conclusive results
/// are forwarded as fresh codewords with probability `forward`; everything
/// else is suppressed.
fn discriminate_and_forward<R: Rng + ?Sized>(
    payload: MultipletPayload,
    pair: CodewordPair,
    forward: f64,
    rng: &mut R,
) -> (MultipletPayload, EveRecord) {
    let round_id = payload.round_id();
    let count = payload.photon_count();
    let Some(state) = payload.state().filter(|_| payload.is_complete()) else {
        return (payload, EveRecord::passive(round_id));
    };
    let basis = BasisChoice::Rectilinear;
    let outcome = measure_product_basis(state, &basis.as_unitary(), rng);
    let verdict = classify(&outcome, &pair).unwrap_or(Classification::Tamper);
    let mut record = EveRecord {
        round_id,
        basis: Some(basis),
        outcome: Some(outcome),
        assumed_pair: Some(pair),
        inferred_bit: verdict.bit(),
        suppressed: true,
    };
    match verdict {
        Classification::Conclusive(bit) if rng.random::<f64>() < forward => {
            record.suppressed = false;
            (MultipletPayload::new(pair.for_bit(bit).state(), round_id), record)
        }
        _ => (MultipletPayload::vanished(count, round_id), record),
    }
}

/// The loss-hiding discrimination attack on a known pair.
///
/// Conclusive identifications happen half the time; Eve forwards enough of
/// them to reproduce the channel's multiplet transmission `1 − loss_budget`
/// when that is at most 1/2, and cannot hide her suppressions otherwise.
pub fn usd_attack<R: Rng + ?Sized>(
    payload: MultipletPayload,
    known_pair: Option<CodewordPair>,
    loss_budget: f64,
    rng: &mut R,
) -> Result<(MultipletPayload, EveRecord), AttackError> {
    let pair = known_pair.ok_or(AttackError::PairUnknown)?;
    let forward = (2.0 * (1.0 - loss_budget)).clamp(0.0, 1.0);
    Ok(discriminate_and_forward(payload, pair, forward, rng))
}

/// The discrimination attack against a uniformly guessed pair.
pub fn pair_guess_usd<R: Rng + ?Sized>(payload: MultipletPayload, rng: &mut R) -> (MultipletPayload, EveRecord) {
    let trit = rng.random_range(0..3u8);
    let pair = match payload.photon_count() {
        4 => CodewordPair::quartet_for_trit(trit),
        _ => CodewordPair::trio_for_trit(trit),
    }
    .expect("trit in range");
    discriminate_and_forward(payload, pair, 1.0, rng)
}

/// A session's attack strategy together with everything Eve recorded.
#[derive(Debug, Clone)]
pub struct Adversary {
    kind: AttackKind,
    records: Vec<EveRecord>,
}

impl Adversary {
    pub fn new(kind: AttackKind) -> Self {
        Self {
            kind,
            records: Vec::new(),
        }
    }

    pub fn kind(&self) -> AttackKind {
        self.kind
    }

    pub fn records(&self) -> &[EveRecord] {
        &self.records
    }

    pub fn record_for(&self, round_id: u64) -> Option<&EveRecord> {
        self.records
            .binary_search_by_key(&round_id, |r| r.round_id)
            .ok()
            .map(|i| &self.records[i])
    }

    /// Runs the strategy on one multiplet fresh from Alice. `known_pair` is
    /// the pair if it has already been announced.
    pub fn intercept<R: Rng + ?Sized>(
        &mut self,
        payload: MultipletPayload,
        known_pair: Option<CodewordPair>,
        loss_budget: f64,
        rng: &mut R,
    ) -> Result<MultipletPayload, AttackError> {
        let (out, record) = match self.kind {
            AttackKind::None => return Ok(payload),
            AttackKind::InterceptResend(policy) => intercept_resend(payload, policy, rng),
            AttackKind::Usd => usd_attack(payload, known_pair, loss_budget, rng)?,
            AttackKind::PairGuessUsd => pair_guess_usd(payload, rng),
        };
        debug_assert!(self.records.last().is_none_or(|r| r.round_id < record.round_id));
        self.records.push(record);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codewords::{quartet_state, Codeword, QuartetIndex};
    use crate::qmath::{outcome_distribution, QubitUnitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn psi(i: u8) -> Codeword {
        Codeword::Quartet(QuartetIndex::new(i).unwrap())
    }

    #[test]
    fn attack_names_round_trip() {
        for name in AttackKind::NAMES {
            let kind: AttackKind = name.parse().unwrap();
            assert_eq!(kind.to_string(), name);
        }
        assert!("bogus".parse::<AttackKind>().is_err());
    }

    #[test]
    fn same_basis_eve_learns_bobs_string() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for round in 0..200 {
            let payload = MultipletPayload::new(psi(1).state(), round);
            let (out, rec) = intercept_resend(payload, BasisPolicy::Rectilinear, &mut rng);
            let bob = crate::decoder::measure_multiplet(&out, BasisChoice::Rectilinear, &mut rng).unwrap();
            assert_eq!(Some(bob), rec.outcome);
            assert_eq!(bob.weight(), 2);
        }
    }

    #[test]
    fn crossed_basis_resend_leaves_codeword_support() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let payload = MultipletPayload::new(psi(1).state(), 0);
        let (out, _) = intercept_resend(payload, BasisPolicy::Diagonal, &mut rng);
        let d = outcome_distribution(out.state().unwrap(), &QubitUnitary::identity());
        let off_support: f64 = d.iter().filter(|(o, _)| o.weight() != 2).map(|(_, p)| p).sum();
        assert!((off_support - 10.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn usd_refuses_without_pair() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let payload = MultipletPayload::new(psi(2).state(), 0);
        assert_eq!(usd_attack(payload, None, 0.5, &mut rng).unwrap_err(), AttackError::PairUnknown);
    }

    #[test]
    fn usd_forwards_identified_codewords_only() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let pair = CodewordPair::quartet_for_trit(0).unwrap();
        let mut forwarded = 0;
        for round in 0..2000 {
            let bit = (round % 2) as u8;
            let payload = MultipletPayload::new(pair.for_bit(bit).state(), round);
            let (out, rec) = usd_attack(payload, Some(pair), 0.5, &mut rng).unwrap();
            if rec.suppressed {
                assert!(out.state().is_none());
            } else {
                forwarded += 1;
                assert_eq!(rec.inferred_bit, Some(bit));
                let fid = match out.state().unwrap() {
                    State::Pure(v) => v.fidelity(&quartet_state(QuartetIndex::new([1, 2][bit as usize]).unwrap())).unwrap(),
                    State::Mixed(_) => unreachable!(),
                };
                assert!((fid - 1.0).abs() < 1e-12);
            }
        }
        let rate = forwarded as f64 / 2000.0;
        assert!((rate - 0.5).abs() < 5.0 * (0.25f64 / 2000.0).sqrt());
    }

    #[test]
    fn usd_without_loss_budget_still_suppresses_half() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let pair = CodewordPair::quartet_for_trit(1).unwrap();
        let suppressed = (0..2000)
            .filter(|&r| {
                let payload = MultipletPayload::new(pair.zero().state(), r);
                usd_attack(payload, Some(pair), 0.0, &mut rng).unwrap().1.suppressed
            })
            .count();
        let rate = suppressed as f64 / 2000.0;
        assert!((rate - 0.5).abs() < 5.0 * (0.25f64 / 2000.0).sqrt());
    }

    #[test]
    fn adversary_none_is_bit_exact() {
        let mut eve = Adversary::new(AttackKind::None);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let payload = MultipletPayload::new(psi(3).state(), 9);
        let out = eve.intercept(payload.clone(), None, 0.0, &mut rng).unwrap();
        assert_eq!(out, payload);
        assert!(eve.records().is_empty());
    }
}
