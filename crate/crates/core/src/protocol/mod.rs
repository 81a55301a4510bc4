//! Full key-distribution sessions.
//!
//! Alice draws a bit string X and a trit string B of `⌈(4+δ)n⌉` symbols.
//! Each trit selects an ordered codeword pair and each bit selects a member.
//! Bob measures each arrived multiplet in a random common basis and
//! confirms receipt; Alice then announces B, Bob decodes, and the two keep
//! the conclusive rounds. At least `2n` sifted bits are required; `n` of
//! them are disclosed to estimate errors, and the rest are reconciled and
//! compressed into the final key.

pub mod amplify;
pub mod messages;
pub mod reconcile;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{Adversary, AttackKind, EveRecord};
use crate::channel::{Channel, ChannelConfig, ChannelError, MultipletPayload};
use crate::codewords::{discard_photon, trio_state, Codeword, CodewordError, CodewordPair};
use crate::decoder::{classify, measure_multiplet, BasisChoice, Classification};
use crate::qmath::{Outcome, State};
use crate::streams::{Domain, SeedSplitter};

use self::amplify::{eve_information, privacy_amplify, PaRate};
pub use self::messages::{
    AbortReason, BitString, ClassicalMessage, MessageTranscript, Party, PositionString, TranscriptEntry, TritString,
};
use self::reconcile::{reconcile, ReconcileParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("n must be at least 1")]
    EmptyBlock,
    #[error("delta must be finite and non-negative, got {0}")]
    Delta(f64),
    #[error("error threshold must lie in [0, 1), got {0}")]
    Threshold(f64),
    #[error("invalid bit {0}")]
    Bit(u8),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Codeword(#[from] CodewordError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Four-photon codewords.
    Quartet,
    /// Singlet plus a maximally mixed photon, prepared directly.
    Trio,
    /// A quartet codeword with one photon discarded at random.
    TrioViaDiscard,
}

impl Variant {
    pub fn photon_count(self) -> usize {
        match self {
            Variant::Quartet => 4,
            _ => 3,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Quartet => "quartet",
            Variant::Trio => "trio",
            Variant::TrioViaDiscard => "trio_via_discard",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quartet" => Ok(Variant::Quartet),
            "trio" => Ok(Variant::Trio),
            "trio_via_discard" => Ok(Variant::TrioViaDiscard),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub variant: Variant,
    /// Size of the test block; the sifted key must reach `2n`.
    pub n: usize,
    pub delta: f64,
    pub error_threshold: f64,
    pub channel: ChannelConfig,
    pub attack: AttackKind,
    /// Announce B before transmission. Insecure; exists to demonstrate the
    /// loss-hiding attack.
    pub announce_b_early: bool,
    pub pa_rate: PaRate,
    pub reconcile: ReconcileParams,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Quartet,
            n: 200,
            delta: 0.5,
            error_threshold: 0.05,
            channel: ChannelConfig::default(),
            attack: AttackKind::None,
            announce_b_early: false,
            pa_rate: PaRate::default(),
            reconcile: ReconcileParams::default(),
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.n == 0 {
            return Err(ProtocolError::EmptyBlock);
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(ProtocolError::Delta(self.delta));
        }
        if !(0.0..1.0).contains(&self.error_threshold) {
            return Err(ProtocolError::Threshold(self.error_threshold));
        }
        self.channel.validate()?;
        Ok(())
    }

    /// `⌈(4+δ)n⌉`.
    pub fn total_rounds(&self) -> u64 {
        ((4.0 + self.delta) * self.n as f64).ceil() as u64
    }

    /// The strategy Eve can actually run: without an early announcement the
    /// pair is unknown at interception time, so the discrimination attack
    /// falls back to guessing the pair.
    pub fn effective_attack(&self) -> AttackKind {
        match self.attack {
            AttackKind::Usd if !self.announce_b_early => AttackKind::PairGuessUsd,
            other => other,
        }
    }
}

/// One round as seen by the simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_id: u64,
    pub trit: u8,
    pub alice_bit: u8,
    /// Photon Alice discarded, for the discard variant.
    pub discarded: Option<u8>,
    /// The pair Bob decodes against, at the photon count he receives.
    pub pair: CodewordPair,
    pub basis: Option<BasisChoice>,
    /// `None` when the multiplet arrived incomplete.
    pub outcome: Option<Outcome>,
    /// Set once B is known to Bob.
    pub classification: Option<Classification>,
}

impl RoundRecord {
    pub fn is_lost(&self) -> bool {
        self.outcome.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct KeyMaterial {
    bits: Vec<u8>,
}

impl KeyMaterial {
    pub fn new(bits: Vec<u8>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl fmt::Display for KeyMaterial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&BitString(self.bits.clone()), f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionReport {
    pub variant: Variant,
    pub attack: AttackKind,
    /// The configured attack could not run and a fallback was used.
    pub attack_refused: bool,
    pub rounds_sent: u64,
    pub rounds_lost: u64,
    pub conclusive_count: u64,
    pub inconclusive_count: u64,
    pub tamper_count: u64,
    pub sifted_length: usize,
    pub test_size: usize,
    pub test_errors: usize,
    pub test_qber: f64,
    pub aborted: bool,
    pub abort_reason: Option<AbortReason>,
    pub reconciliation_leakage: usize,
    pub final_key_length: usize,
    /// Bits of the final key determined by Eve's records and the public
    /// discussion; absent when no record exists.
    pub eve_information: Option<usize>,
}

impl SessionReport {
    pub fn rounds_received(&self) -> u64 {
        self.rounds_sent - self.rounds_lost
    }

    /// Alarm events (test mismatches plus tamper outcomes) per opportunity
    /// (test bits plus measured multiplets).
    pub fn detection_rate(&self) -> f64 {
        let trials = self.test_size as u64 + self.rounds_received();
        if trials == 0 {
            0.0
        } else {
            (self.test_errors as u64 + self.tamper_count) as f64 / trials as f64
        }
    }

    pub fn detection_trials(&self) -> u64 {
        self.test_size as u64 + self.rounds_received()
    }
}

#[derive(Debug, Clone)]
pub struct SessionOutcome {
    pub report: SessionReport,
    pub alice_key: KeyMaterial,
    pub bob_key: KeyMaterial,
    pub transcript: MessageTranscript,
    pub rounds: Vec<RoundRecord>,
    pub eve_records: Vec<EveRecord>,
}

/// Prepares Alice's multiplet for one round.
///
/// Trit 0 selects pair (1,2), trit 1 pair (2,3), trit 2 pair (3,1); `bit`
/// selects the member. The discard variant draws the discarded photon from
/// `rng`.
pub fn alice_prepare_round<R: Rng + ?Sized>(
    round_id: u64,
    bit: u8,
    trit: u8,
    variant: Variant,
    rng: &mut R,
) -> Result<(MultipletPayload, RoundRecord), ProtocolError> {
    if bit > 1 {
        return Err(ProtocolError::Bit(bit));
    }
    let (state, pair, discarded) = match variant {
        Variant::Quartet => {
            let pair = CodewordPair::quartet_for_trit(trit)?;
            (pair.for_bit(bit).state(), pair, None)
        }
        Variant::Trio => {
            let pair = CodewordPair::trio_for_trit(trit)?;
            (pair.for_bit(bit).state(), pair, None)
        }
        Variant::TrioViaDiscard => {
            let quartet_pair = CodewordPair::quartet_for_trit(trit)?;
            let position = rng.random_range(1..=4usize);
            let Codeword::Quartet(sent) = quartet_pair.for_bit(bit) else {
                unreachable!("quartet pair")
            };
            let (reduced, label) = discard_photon(sent, position)?;
            let pair = quartet_pair.after_discard(position)?;
            debug_assert_eq!(pair.for_bit(bit), Codeword::Trio(label));
            debug_assert!(reduced.max_abs_diff(&trio_state(label)).is_ok_and(|d| d < 1e-12));
            (State::Mixed(reduced), pair, Some(position as u8))
        }
    };
    let record = RoundRecord {
        round_id,
        trit,
        alice_bit: bit,
        discarded,
        pair,
        basis: None,
        outcome: None,
        classification: None,
    };
    Ok((MultipletPayload::new(state, round_id), record))
}

/// Quantum leg of the simulation shared by sessions and round sweeps.
struct QuantumLink {
    cfg: ProtocolConfig,
    seeds: SeedSplitter,
    channel: Channel,
    eve: Adversary,
    loss_budget: f64,
}

impl QuantumLink {
    fn new(cfg: &ProtocolConfig, seeds: SeedSplitter) -> Result<Self, ProtocolError> {
        cfg.validate()?;
        Ok(Self {
            cfg: *cfg,
            seeds,
            channel: Channel::new(cfg.channel)?,
            eve: Adversary::new(cfg.effective_attack()),
            loss_budget: cfg.channel.multiplet_loss(cfg.variant.photon_count()),
        })
    }

    /// Alice's symbols for a round; drawn from the round's own stream.
    fn alice_round(&self, round_id: u64) -> Result<(MultipletPayload, RoundRecord), ProtocolError> {
        let mut rng = self.seeds.stream(Domain::Alice, round_id);
        let bit = rng.random_range(0..2u8);
        let trit = rng.random_range(0..3u8);
        alice_prepare_round(round_id, bit, trit, self.cfg.variant, &mut rng)
    }

    fn deliver(&mut self, payload: MultipletPayload, record: &RoundRecord) -> MultipletPayload {
        let round_id = record.round_id;
        let mut channel_rng = self.seeds.stream(Domain::Channel, round_id);
        match self.eve.kind() {
            AttackKind::None => self.channel.transmit(payload, &mut channel_rng),
            kind => {
                let mut eve_rng = self.seeds.stream(Domain::Eve, round_id);
                let known = self.cfg.announce_b_early.then_some(record.pair);
                let out = self
                    .eve
                    .intercept(payload, known, self.loss_budget, &mut eve_rng)
                    .expect("effective attack has its preconditions");
                match kind {
                    // Eve mimics the natural loss statistic on her perfect line.
                    AttackKind::InterceptResend(_) => self.channel.apply_loss(out, &mut channel_rng),
                    _ => out,
                }
            }
        }
    }

    /// Runs one round through Alice, the line and Bob's measurement.
    fn run_round(&mut self, round_id: u64, bob_basis: Option<BasisChoice>) -> Result<RoundRecord, ProtocolError> {
        let (payload, mut record) = self.alice_round(round_id)?;
        let received = self.deliver(payload, &record);
        let mut bob_rng = self.seeds.stream(Domain::Bob, round_id);
        let basis = bob_basis.unwrap_or_else(|| BasisChoice::random(&mut bob_rng));
        record.basis = Some(basis);
        record.outcome = measure_multiplet(&received, basis, &mut bob_rng).ok();
        Ok(record)
    }
}

/// Bob's verdict for every arrived round, now that the pairs are known.
fn decode(records: &mut [RoundRecord]) {
    for r in records.iter_mut() {
        r.classification = r
            .outcome
            .map(|o| classify(&o, &r.pair).expect("outcome length matches the pair"));
    }
}

/// Output of sifting.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sifted {
    pub alice: Vec<u8>,
    pub bob: Vec<u8>,
    /// Round id of each sifted position.
    pub round_ids: Vec<u64>,
    pub conclusive: u64,
    pub inconclusive: u64,
    pub tamper: u64,
}

/// Keeps the conclusive rounds, in round order.
pub fn sift(records: &[RoundRecord]) -> Sifted {
    let mut ordered: Vec<&RoundRecord> = records.iter().collect();
    ordered.sort_by_key(|r| r.round_id);
    let mut out = Sifted::default();
    for r in ordered {
        match r.classification {
            Some(Classification::Conclusive(bit)) => {
                out.alice.push(r.alice_bit);
                out.bob.push(bit);
                out.round_ids.push(r.round_id);
                out.conclusive += 1;
            }
            Some(Classification::Inconclusive) => out.inconclusive += 1,
            Some(Classification::Tamper) => out.tamper += 1,
            None => {}
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub errors: usize,
    pub qber: f64,
    pub abort: bool,
}

/// Mismatch fraction on `subset`; aborts when it strictly exceeds `threshold`.
pub fn estimate_error(alice: &[u8], bob: &[u8], subset: &[usize], threshold: f64) -> ErrorEstimate {
    let errors = subset.iter().filter(|&&i| alice[i] != bob[i]).count();
    let qber = if subset.is_empty() {
        0.0
    } else {
        errors as f64 / subset.len() as f64
    };
    ErrorEstimate {
        errors,
        qber,
        abort: qber > threshold,
    }
}

fn lost_ids(records: &[RoundRecord]) -> Vec<u64> {
    records.iter().filter(|r| r.is_lost()).map(|r| r.round_id).collect()
}

fn announce_b(records: &[RoundRecord], variant: Variant) -> ClassicalMessage {
    ClassicalMessage::AliceAnnounceB {
        trits: TritString(records.iter().map(|r| r.trit).collect()),
        discards: (variant == Variant::TrioViaDiscard)
            .then(|| PositionString(records.iter().map(|r| r.discarded.unwrap_or(1)).collect())),
    }
}

/// Runs one complete session from a master seed.
pub fn run_session(cfg: &ProtocolConfig, seed: u64) -> Result<SessionOutcome, ProtocolError> {
    let seeds = SeedSplitter::new(seed);
    let mut link = QuantumLink::new(cfg, seeds)?;
    let total = cfg.total_rounds();
    let mut transcript = MessageTranscript::new();

    let mut records = Vec::with_capacity(total as usize);
    if cfg.announce_b_early {
        // Alice's symbols do not depend on the line, so B can go out first.
        let pre: Vec<RoundRecord> = (0..total)
            .map(|r| link.alice_round(r).map(|(_, rec)| rec))
            .collect::<Result<_, _>>()?;
        transcript.push(Party::Alice, announce_b(&pre, cfg.variant));
    }
    for round_id in 0..total {
        records.push(link.run_round(round_id, None)?);
    }
    transcript.push(
        Party::Bob,
        ClassicalMessage::BobReceived {
            rounds: total,
            lost: lost_ids(&records),
        },
    );
    if !cfg.announce_b_early {
        transcript.push(Party::Alice, announce_b(&records, cfg.variant));
    }
    decode(&mut records);
    let sifted = sift(&records);
    transcript.push(
        Party::Bob,
        ClassicalMessage::BobVerdicts {
            conclusive: sifted.round_ids.clone(),
            tamper: records
                .iter()
                .filter(|r| r.classification == Some(Classification::Tamper))
                .map(|r| r.round_id)
                .collect(),
        },
    );

    let eve_records = link.eve.records().to_vec();
    let mut report = SessionReport {
        variant: cfg.variant,
        attack: link.eve.kind(),
        attack_refused: link.eve.kind() != cfg.attack,
        rounds_sent: total,
        rounds_lost: records.iter().filter(|r| r.is_lost()).count() as u64,
        conclusive_count: sifted.conclusive,
        inconclusive_count: sifted.inconclusive,
        tamper_count: sifted.tamper,
        sifted_length: sifted.alice.len(),
        test_size: 0,
        test_errors: 0,
        test_qber: 0.0,
        aborted: false,
        abort_reason: None,
        reconciliation_leakage: 0,
        final_key_length: 0,
        eve_information: Some(0),
    };
    let finish = |report: &mut SessionReport, transcript: &mut MessageTranscript, reason: AbortReason| {
        transcript.push(Party::Alice, ClassicalMessage::Abort { reason: reason.clone() });
        report.aborted = true;
        report.abort_reason = Some(reason);
    };
    let aborted = |report: SessionReport, transcript: MessageTranscript| SessionOutcome {
        report,
        alice_key: KeyMaterial::default(),
        bob_key: KeyMaterial::default(),
        transcript,
        rounds: records.clone(),
        eve_records: eve_records.clone(),
    };

    let n = cfg.n;
    if sifted.alice.len() < 2 * n {
        let reason = AbortReason::InsufficientSifted {
            sifted: sifted.alice.len(),
            required: 2 * n,
        };
        finish(&mut report, &mut transcript, reason);
        return Ok(aborted(report, transcript));
    }

    let mut test_rng = seeds.stream(Domain::TestSubset, 0);
    let mut subset = index::sample(&mut test_rng, sifted.alice.len(), n).into_vec();
    subset.sort_unstable();
    transcript.push(Party::Alice, ClassicalMessage::AliceTestSubset { indices: subset.clone() });
    for (party, bits) in [(Party::Alice, &sifted.alice), (Party::Bob, &sifted.bob)] {
        transcript.push(
            party,
            ClassicalMessage::BitReveal {
                party,
                indices: subset.clone(),
                bits: BitString(subset.iter().map(|&i| bits[i]).collect()),
            },
        );
    }
    let estimate = estimate_error(&sifted.alice, &sifted.bob, &subset, cfg.error_threshold);
    report.test_size = n;
    report.test_errors = estimate.errors;
    report.test_qber = estimate.qber;
    if estimate.abort {
        let reason = AbortReason::ErrorRateExceeded {
            qber: estimate.qber,
            threshold: cfg.error_threshold,
        };
        finish(&mut report, &mut transcript, reason);
        return Ok(aborted(report, transcript));
    }

    let mut in_test = vec![false; sifted.alice.len()];
    for &i in &subset {
        in_test[i] = true;
    }
    let keep: Vec<usize> = (0..sifted.alice.len()).filter(|&i| !in_test[i]).collect();
    let alice_rest: Vec<u8> = keep.iter().map(|&i| sifted.alice[i]).collect();
    let bob_rest: Vec<u8> = keep.iter().map(|&i| sifted.bob[i]).collect();

    let mut rec_rng = seeds.stream(Domain::Reconcile, 0);
    let reconciled = match reconcile(&alice_rest, &bob_rest, estimate.qber, cfg.reconcile, &mut rec_rng) {
        Ok(r) => r,
        Err(err) => {
            let leakage = match err {
                reconcile::ReconcileError::ResidualMismatch { leakage } => leakage,
                reconcile::ReconcileError::LengthMismatch { .. } => 0,
            };
            report.reconciliation_leakage = leakage;
            finish(&mut report, &mut transcript, AbortReason::ReconciliationFailed { leakage });
            return Ok(aborted(report, transcript));
        }
    };
    report.reconciliation_leakage = reconciled.leakage;
    transcript.push(
        Party::Alice,
        ClassicalMessage::Reconciliation {
            passes: reconciled.passes,
            parities: reconciled.leakage,
        },
    );

    let hash_seed: u64 = seeds.stream(Domain::Amplify, 0).random();
    let (alice_key, matrix) =
        match privacy_amplify(&alice_rest, reconciled.leakage, estimate.qber, cfg.pa_rate, hash_seed) {
            Ok(v) => v,
            Err(_) => {
                finish(&mut report, &mut transcript, AbortReason::KeyRateExhausted);
                return Ok(aborted(report, transcript));
            }
        };
    let bob_key = KeyMaterial::new(matrix.apply(&reconciled.corrected));
    transcript.push(
        Party::Alice,
        ClassicalMessage::PrivacyAmplification {
            hash_seed,
            output_length: matrix.output_len(),
        },
    );
    report.final_key_length = alice_key.len();

    // Eve's certain knowledge of each remaining key position.
    let round_of: Vec<u64> = keep.iter().map(|&i| sifted.round_ids[i]).collect();
    let known: Vec<bool> = round_of
        .iter()
        .zip(&alice_rest)
        .map(|(&rid, &bit)| {
            let record = &records[rid as usize];
            link.eve
                .record_for(rid)
                .and_then(|e| e.certain_bit(&record.pair))
                .is_some_and(|b| b == bit)
        })
        .collect();
    report.eve_information = Some(eve_information(&matrix, &known, &reconciled.disclosed));

    Ok(SessionOutcome {
        report,
        alice_key,
        bob_key,
        transcript,
        rounds: records,
        eve_records,
    })
}

/// Per-round tallies over many independent rounds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoundStats {
    pub rounds: u64,
    pub lost: u64,
    pub conclusive: u64,
    pub inconclusive: u64,
    pub tamper: u64,
    /// Conclusive rounds decoded to the wrong bit.
    pub errors: u64,
}

impl RoundStats {
    pub fn complete(&self) -> u64 {
        self.rounds - self.lost
    }

    pub fn conclusive_rate(&self) -> f64 {
        self.conclusive as f64 / self.complete().max(1) as f64
    }

    /// Tamper or wrong-bit verdicts per complete round.
    pub fn alarm_rate(&self) -> f64 {
        (self.tamper + self.errors) as f64 / self.complete().max(1) as f64
    }
}

/// Runs `rounds` rounds of the quantum leg and tallies Bob's verdicts
/// against the true pair. `bob_basis` pins Bob's basis when set.
pub fn simulate_rounds(
    cfg: &ProtocolConfig,
    rounds: u64,
    seed: u64,
    bob_basis: Option<BasisChoice>,
) -> Result<RoundStats, ProtocolError> {
    let mut link = QuantumLink::new(cfg, SeedSplitter::new(seed))?;
    let mut stats = RoundStats {
        rounds,
        ..Default::default()
    };
    for round_id in 0..rounds {
        let mut record = link.run_round(round_id, bob_basis)?;
        decode(std::slice::from_mut(&mut record));
        match record.classification {
            None => stats.lost += 1,
            Some(Classification::Conclusive(bit)) => {
                stats.conclusive += 1;
                stats.errors += u64::from(bit != record.alice_bit);
            }
            Some(Classification::Inconclusive) => stats.inconclusive += 1,
            Some(Classification::Tamper) => stats.tamper += 1,
        }
    }
    Ok(stats)
}
