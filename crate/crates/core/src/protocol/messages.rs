//! Classical messages and the session transcript.
//!
//! A transcript serializes to one JSON object per line carrying the
//! ordinal, the sender, the message type and its fields. Bit and trit
//! strings are written as ASCII digits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TranscriptError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid digit string {0:?}")]
    Digits(String),
}

/// A string of 0/1 values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString(pub Vec<u8>);

/// A string of 0/1/2 values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TritString(pub Vec<u8>);

/// Digits 1..=4 naming the photon Alice discarded in each round.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PositionString(pub Vec<u8>);

macro_rules! digit_string {
    ($ty:ident, $lo:expr, $hi:expr) => {
        impl $ty {
            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn as_slice(&self) -> &[u8] {
                &self.0
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let s: String = self.0.iter().map(|&d| char::from(b'0' + d)).collect();
                f.write_str(&s)
            }
        }

        impl FromStr for $ty {
            type Err = TranscriptError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.bytes()
                    .map(|b| match b.checked_sub(b'0') {
                        Some(d) if ($lo..=$hi).contains(&d) => Ok(d),
                        _ => Err(TranscriptError::Digits(s.to_string())),
                    })
                    .collect::<Result<Vec<u8>, _>>()
                    .map($ty)
            }
        }

        impl Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

digit_string!(BitString, 0, 1);
digit_string!(TritString, 0, 2);
digit_string!(PositionString, 1, 4);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AbortReason {
    InsufficientSifted { sifted: usize, required: usize },
    ErrorRateExceeded { qber: f64, threshold: f64 },
    ReconciliationFailed { leakage: usize },
    KeyRateExhausted,
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbortReason::InsufficientSifted { .. } => f.write_str("insufficient_sifted"),
            AbortReason::ErrorRateExceeded { .. } => f.write_str("error_rate_exceeded"),
            AbortReason::ReconciliationFailed { .. } => f.write_str("reconciliation_failed"),
            AbortReason::KeyRateExhausted => f.write_str("key_rate_exhausted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassicalMessage {
    /// Multiplets `0..rounds` arrived except `lost`.
    BobReceived { rounds: u64, lost: Vec<u64> },
    AliceAnnounceB {
        trits: TritString,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        discards: Option<PositionString>,
    },
    /// Rounds Bob decoded conclusively, and rounds showing a tamper outcome.
    BobVerdicts { conclusive: Vec<u64>, tamper: Vec<u64> },
    /// Positions within the sifted string used for error estimation.
    AliceTestSubset { indices: Vec<usize> },
    BitReveal { party: Party, indices: Vec<usize>, bits: BitString },
    Reconciliation { passes: usize, parities: usize },
    PrivacyAmplification { hash_seed: u64, output_length: usize },
    Abort { reason: AbortReason },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub ordinal: usize,
    pub sender: Party,
    #[serde(flatten)]
    pub message: ClassicalMessage,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MessageTranscript {
    entries: Vec<TranscriptEntry>,
}

impl MessageTranscript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, sender: Party, message: ClassicalMessage) {
        let ordinal = self.entries.len();
        self.entries.push(TranscriptEntry {
            ordinal,
            sender,
            message,
        });
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    fn position(&self, pred: impl Fn(&ClassicalMessage) -> bool) -> Option<usize> {
        self.entries.iter().position(|e| pred(&e.message))
    }

    /// Whether B was announced before Bob confirmed receipt.
    pub fn announces_b_before_receipt(&self) -> bool {
        let b = self.position(|m| matches!(m, ClassicalMessage::AliceAnnounceB { .. }));
        let r = self.position(|m| matches!(m, ClassicalMessage::BobReceived { .. }));
        match (b, r) {
            (Some(b), Some(r)) => b < r,
            (Some(_), None) => true,
            _ => false,
        }
    }

    pub fn abort_reason(&self) -> Option<&AbortReason> {
        self.entries.iter().find_map(|e| match &e.message {
            ClassicalMessage::Abort { reason } => Some(reason),
            _ => None,
        })
    }

    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("transcript entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_lines(text: &str) -> Result<Self, TranscriptError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let entry: TranscriptEntry = serde_json::from_str(line).map_err(|e| TranscriptError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if entry.ordinal != entries.len() {
                return Err(TranscriptError::Parse {
                    line: i + 1,
                    message: format!("ordinal {} out of sequence", entry.ordinal),
                });
            }
            entries.push(entry);
        }
        Ok(Self { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn line_format() {
        let mut t = MessageTranscript::new();
        t.push(
            Party::Bob,
            ClassicalMessage::BobReceived {
                rounds: 3,
                lost: vec![1],
            },
        );
        t.push(
            Party::Alice,
            ClassicalMessage::AliceAnnounceB {
                trits: "012".parse().unwrap(),
                discards: None,
            },
        );
        let text = t.to_lines();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], r#"{"ordinal":0,"sender":"bob","type":"bob_received","rounds":3,"lost":[1]}"#);
        assert_eq!(lines[1], r#"{"ordinal":1,"sender":"alice","type":"alice_announce_b","trits":"012"}"#);
        assert!(!t.announces_b_before_receipt());
    }

    #[test]
    fn rejects_out_of_sequence_ordinals() {
        let line = r#"{"ordinal":4,"sender":"bob","type":"bob_received","rounds":3,"lost":[]}"#;
        assert!(MessageTranscript::from_lines(line).is_err());
    }

    #[test]
    fn digit_strings_validate() {
        assert!("0120".parse::<TritString>().is_ok());
        assert!("0130".parse::<TritString>().is_err());
        assert!("0".parse::<PositionString>().is_err());
        assert_eq!("1011".parse::<BitString>().unwrap().0, vec![1, 0, 1, 1]);
    }

    fn message() -> impl Strategy<Value = ClassicalMessage> {
        prop_oneof![
            (any::<u64>(), prop::collection::vec(any::<u64>(), 0..5))
                .prop_map(|(rounds, lost)| ClassicalMessage::BobReceived { rounds, lost }),
            (prop::collection::vec(0u8..3, 0..20), prop::option::of(prop::collection::vec(1u8..5, 0..20)))
                .prop_map(|(t, d)| ClassicalMessage::AliceAnnounceB {
                    trits: TritString(t),
                    discards: d.map(PositionString),
                }),
            (prop::collection::vec(any::<usize>(), 0..8), prop::collection::vec(0u8..2, 0..8)).prop_map(
                |(indices, bits)| ClassicalMessage::BitReveal {
                    party: Party::Alice,
                    indices,
                    bits: BitString(bits),
                }
            ),
            (0.0f64..1.0, 0.0f64..1.0).prop_map(|(qber, threshold)| ClassicalMessage::Abort {
                reason: AbortReason::ErrorRateExceeded { qber, threshold },
            }),
        ]
    }

    proptest! {
        #[test]
        fn transcript_lines_round_trip(msgs in prop::collection::vec(message(), 0..6)) {
            let mut t = MessageTranscript::new();
            for (i, m) in msgs.into_iter().enumerate() {
                t.push(if i % 2 == 0 { Party::Alice } else { Party::Bob }, m);
            }
            let parsed = MessageTranscript::from_lines(&t.to_lines()).unwrap();
            prop_assert_eq!(parsed, t);
        }
    }
}
