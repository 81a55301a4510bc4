//! Bob's measurement and verdict rules.
//!
//! Every photon of a multiplet is measured in one common basis. A codeword
//! is compatible with an outcome when each of its singlet pairs came out
//! antiparallel; a pair member that is incompatible is ruled out, which
//! identifies the other member without error.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{loss_mask, MultipletPayload};
use crate::codewords::{Codeword, CodewordPair};
use crate::qmath::{measure_product_basis, Outcome, QubitUnitary};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("outcome {outcome} has {len} bits but the pair needs {expected}")]
    OutcomeLength {
        outcome: Outcome,
        len: usize,
        expected: usize,
    },
    #[error("photons {0:?} were lost; the multiplet cannot be measured")]
    PhotonsLost(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisChoice {
    Rectilinear,
    Diagonal,
}

impl BasisChoice {
    pub fn as_unitary(self) -> QubitUnitary {
        match self {
            BasisChoice::Rectilinear => QubitUnitary::identity(),
            BasisChoice::Diagonal => QubitUnitary::hadamard(),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random::<bool>() {
            BasisChoice::Diagonal
        } else {
            BasisChoice::Rectilinear
        }
    }

    pub fn other(self) -> Self {
        match self {
            BasisChoice::Rectilinear => BasisChoice::Diagonal,
            BasisChoice::Diagonal => BasisChoice::Rectilinear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Conclusive(u8),
    Inconclusive,
    Tamper,
}

impl Classification {
    pub fn bit(self) -> Option<u8> {
        match self {
            Classification::Conclusive(b) => Some(b),
            _ => None,
        }
    }
}

/// Outcomes no legal codeword can produce.
pub fn is_tamper_signature(outcome: &Outcome) -> bool {
    match outcome.len() {
        4 => outcome.weight() != 2,
        3 => outcome.weight() == 0 || outcome.weight() == 3,
        _ => false,
    }
}

fn compatible(codeword: Codeword, bits: &[u8]) -> bool {
    codeword.diagram().compatible_with(bits)
}

/// Verdict for any pair of same-size codewords.
pub fn classify(outcome: &Outcome, pair: &CodewordPair) -> Result<Classification, DecodeError> {
    let expected = pair.photon_count();
    if outcome.len() != expected {
        return Err(DecodeError::OutcomeLength {
            outcome: *outcome,
            len: outcome.len(),
            expected,
        });
    }
    if is_tamper_signature(outcome) {
        return Ok(Classification::Tamper);
    }
    let bits: Vec<u8> = outcome.bits().collect();
    Ok(match (compatible(pair.zero(), &bits), compatible(pair.one(), &bits)) {
        (true, false) => Classification::Conclusive(0),
        (false, true) => Classification::Conclusive(1),
        (true, true) => Classification::Inconclusive,
        // Unreachable for legal multiplets once the signature check passed.
        (false, false) => Classification::Tamper,
    })
}

/// Verdict for a quartet outcome under an announced quartet pair.
pub fn classify_quartet(outcome: &Outcome, pair: &CodewordPair) -> Result<Classification, DecodeError> {
    classify(outcome, pair)
}

/// Verdict for a trio outcome under an announced trio pair.
pub fn classify_trio(outcome: &Outcome, pair: &CodewordPair) -> Result<Classification, DecodeError> {
    classify(outcome, pair)
}

/// Measures every photon of a complete multiplet in `basis`.
pub fn measure_multiplet<R: Rng + ?Sized>(
    payload: &MultipletPayload,
    basis: BasisChoice,
    rng: &mut R,
) -> Result<Outcome, DecodeError> {
    match payload.state() {
        Some(state) if payload.is_complete() => Ok(measure_product_basis(state, &basis.as_unitary(), rng)),
        _ => Err(DecodeError::PhotonsLost(loss_mask(payload))),
    }
}
