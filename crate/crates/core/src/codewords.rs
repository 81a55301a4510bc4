//! Singlet-pairing codewords.
//!
//! Three quartet states span the two-dimensional subspace of four photons
//! that is invariant under collective rotations:
//!
//! ```text
//! ψ₁ = (a − b)/√2   pairs (1,2)(3,4)
//! ψ₂ = (c − b)/√2   pairs (1,3)(2,4)
//! ψ₃ = (a − c)/√2   pairs (1,4)(2,3)
//! a = (|0101⟩ + |1010⟩)/√2
//! b = (|0110⟩ + |1001⟩)/√2
//! c = (|0011⟩ + |1100⟩)/√2
//! ```
//!
//! Three trio states, each a singlet on two photons with the third photon
//! maximally mixed, form the corresponding noiseless subsystem. Photon
//! positions are 1-based throughout this module.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qmath::{partial_trace, DensityMatrix, QmathError, State, StateVector, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodewordError {
    #[error("codeword index {0} is outside 1..=3")]
    Index(u8),
    #[error("photon position {position} is outside 1..={count}")]
    Position { position: usize, count: usize },
    #[error("pairing diagram is malformed: {0}")]
    Diagram(String),
    #[error("codeword pair members must differ and share a photon count")]
    Pair,
    #[error(transparent)]
    Math(#[from] QmathError),
}

/// Label of one of the three quartet codewords ψ₁, ψ₂, ψ₃.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct QuartetIndex(u8);

/// Label of one of the three trio codewords ρ₁, ρ₂, ρ₃.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct TrioIndex(u8);

macro_rules! index_impls {
    ($ty:ident) => {
        impl $ty {
            pub fn new(value: u8) -> Result<Self, CodewordError> {
                if (1..=3).contains(&value) {
                    Ok(Self(value))
                } else {
                    Err(CodewordError::Index(value))
                }
            }

            pub fn value(self) -> u8 {
                self.0
            }

            pub fn all() -> [Self; 3] {
                [Self(1), Self(2), Self(3)]
            }
        }

        impl TryFrom<u8> for $ty {
            type Error = CodewordError;

            fn try_from(value: u8) -> Result<Self, Self::Error> {
                Self::new(value)
            }
        }

        impl From<$ty> for u8 {
            fn from(i: $ty) -> u8 {
                i.0
            }
        }
    };
}

index_impls!(QuartetIndex);
index_impls!(TrioIndex);

impl QuartetIndex {
    pub fn diagram(self) -> PairingDiagram {
        let pairs = match self.0 {
            1 => vec![(1, 2), (3, 4)],
            2 => vec![(1, 3), (2, 4)],
            _ => vec![(1, 4), (2, 3)],
        };
        PairingDiagram::new(4, pairs).expect("fixed quartet pairing")
    }
}

impl TrioIndex {
    /// Photon positions holding the singlet.
    pub fn singlet_pair(self) -> (usize, usize) {
        match self.0 {
            1 => (1, 2),
            2 => (1, 3),
            _ => (2, 3),
        }
    }

    pub fn mixed_position(self) -> usize {
        match self.0 {
            1 => 3,
            2 => 2,
            _ => 1,
        }
    }

    pub fn from_singlet_pair(pair: (usize, usize)) -> Option<Self> {
        let pair = (pair.0.min(pair.1), pair.0.max(pair.1));
        Self::all().into_iter().find(|t| t.singlet_pair() == pair)
    }

    pub fn diagram(self) -> PairingDiagram {
        PairingDiagram::new(3, vec![self.singlet_pair()]).expect("fixed trio pairing")
    }
}

/// How photons are grouped into singlets; unpaired photons are maximally mixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingDiagram {
    photon_count: usize,
    pairs: Vec<(usize, usize)>,
    mixed_positions: Vec<usize>,
}

impl PairingDiagram {
    pub fn new(photon_count: usize, pairs: Vec<(usize, usize)>) -> Result<Self, CodewordError> {
        let mut seen = vec![false; photon_count + 1];
        for &(p, q) in &pairs {
            for pos in [p, q] {
                if pos == 0 || pos > photon_count {
                    return Err(CodewordError::Position {
                        position: pos,
                        count: photon_count,
                    });
                }
                if seen[pos] {
                    return Err(CodewordError::Diagram(format!("photon {pos} paired twice")));
                }
                seen[pos] = true;
            }
        }
        let mixed_positions = (1..=photon_count).filter(|&p| !seen[p]).collect();
        Ok(Self {
            photon_count,
            pairs,
            mixed_positions,
        })
    }

    pub fn photon_count(&self) -> usize {
        self.photon_count
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn mixed_positions(&self) -> &[usize] {
        &self.mixed_positions
    }

    /// Amplitude of the paired photons in computational basis string `index`
    /// (ignoring mixed positions): a product of singlet amplitudes.
    fn pair_amplitude(&self, index: usize) -> f64 {
        let bit = |pos: usize| (index >> (self.photon_count - pos)) & 1;
        self.pairs.iter().fold(1.0, |acc, &(p, q)| {
            match (bit(p), bit(q)) {
                (0, 1) => acc * FRAC_1_SQRT_2,
                (1, 0) => -acc * FRAC_1_SQRT_2,
                _ => 0.0,
            }
        })
    }

    /// Whether every singlet in the diagram is antiparallel in `bits`.
    pub fn compatible_with(&self, bits: &[u8]) -> bool {
        self.pairs.iter().all(|&(p, q)| bits[p - 1] != bits[q - 1])
    }

    /// The pure product of singlets; only defined without mixed photons.
    pub fn pure_state(&self) -> Result<StateVector, CodewordError> {
        if !self.mixed_positions.is_empty() {
            return Err(CodewordError::Diagram("diagram has mixed photons".into()));
        }
        let dim = 1 << self.photon_count;
        StateVector::new((0..dim).map(|i| C64::new(self.pair_amplitude(i), 0.0)).collect())
            .map_err(Into::into)
    }

    /// Singlet projectors on each pair tensored with `I/2` on each mixed photon.
    pub fn density(&self) -> Result<DensityMatrix, CodewordError> {
        let n = self.photon_count;
        let dim = 1 << n;
        let mixed_mask: usize = self
            .mixed_positions
            .iter()
            .map(|&p| 1usize << (n - p))
            .sum();
        let mixed_weight = 0.5f64.powi(self.mixed_positions.len() as i32);
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                if r & mixed_mask != c & mixed_mask {
                    continue;
                }
                let v = self.pair_amplitude(r) * self.pair_amplitude(c) * mixed_weight;
                data[r * dim + c] = C64::new(v, 0.0);
            }
        }
        DensityMatrix::new(n, data).map_err(Into::into)
    }
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> StateVector {
    let s = FRAC_1_SQRT_2;
    StateVector::new(vec![
        C64::new(0.0, 0.0),
        C64::new(s, 0.0),
        C64::new(-s, 0.0),
        C64::new(0.0, 0.0),
    ])
    .expect("normalized")
}

fn sym_pair(first: &str, second: &str) -> StateVector {
    let a = StateVector::from_bits(first).expect("valid bits");
    let b = StateVector::from_bits(second).expect("valid bits");
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    StateVector::combination(&[(h, &a), (h, &b)]).expect("normalized")
}

/// The quartet basis states `(a, b, c)`.
pub fn abc_states() -> (StateVector, StateVector, StateVector) {
    (
        sym_pair("0101", "1010"),
        sym_pair("0110", "1001"),
        sym_pair("0011", "1100"),
    )
}

/// ψᵢ with signs fixed by its a/b/c decomposition.
pub fn quartet_state(i: QuartetIndex) -> StateVector {
    static CACHE: OnceLock<[StateVector; 3]> = OnceLock::new();
    CACHE.get_or_init(|| [1, 2, 3].map(|k| build_quartet(QuartetIndex(k))))[i.0 as usize - 1].clone()
}

fn build_quartet(i: QuartetIndex) -> StateVector {
    let (a, b, c) = abc_states();
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let terms = match i.0 {
        1 => [(h, &a), (-h, &b)],
        2 => [(h, &c), (-h, &b)],
        _ => [(h, &a), (-h, &c)],
    };
    StateVector::combination(&terms).expect("normalized")
}

/// ρᵢ: singlet on `singlet_pair(i)`, third photon maximally mixed.
pub fn trio_state(i: TrioIndex) -> DensityMatrix {
    static CACHE: OnceLock<[DensityMatrix; 3]> = OnceLock::new();
    CACHE.get_or_init(|| [1, 2, 3].map(|k| TrioIndex(k).diagram().density().expect("valid trio diagram")))
        [i.0 as usize - 1]
        .clone()
}

/// Reduces ψᵢ by tracing out photon `discarded` (1-based) and relabels the
/// survivors 1..3 in order. Returns the reduced state and the trio label of
/// the surviving singlet.
pub fn discard_photon(
    i: QuartetIndex,
    discarded: usize,
) -> Result<(DensityMatrix, TrioIndex), CodewordError> {
    if !(1..=4).contains(&discarded) {
        return Err(CodewordError::Position {
            position: discarded,
            count: 4,
        });
    }
    let keep: Vec<usize> = (0..4).filter(|&q| q != discarded - 1).collect();
    let reduced = partial_trace(&quartet_state(i).to_density(), &keep)?;
    Ok((reduced, trio_after_discard(i, discarded)?))
}

/// Trio label of the singlet that survives discarding `discarded` from ψᵢ.
pub fn trio_after_discard(i: QuartetIndex, discarded: usize) -> Result<TrioIndex, CodewordError> {
    if !(1..=4).contains(&discarded) {
        return Err(CodewordError::Position {
            position: discarded,
            count: 4,
        });
    }
    let relabel = |p: usize| if p > discarded { p - 1 } else { p };
    let survivor = i
        .diagram()
        .pairs()
        .iter()
        .copied()
        .find(|&(p, q)| p != discarded && q != discarded)
        .expect("one pair avoids the discarded photon");
    Ok(TrioIndex::from_singlet_pair((relabel(survivor.0), relabel(survivor.1)))
        .expect("three photons admit every pairing"))
}

/// One codeword of either protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Codeword {
    Quartet(QuartetIndex),
    Trio(TrioIndex),
}

impl Codeword {
    pub fn photon_count(self) -> usize {
        match self {
            Codeword::Quartet(_) => 4,
            Codeword::Trio(_) => 3,
        }
    }

    pub fn diagram(self) -> PairingDiagram {
        match self {
            Codeword::Quartet(i) => i.diagram(),
            Codeword::Trio(i) => i.diagram(),
        }
    }

    pub fn state(self) -> State {
        match self {
            Codeword::Quartet(i) => State::Pure(quartet_state(i)),
            Codeword::Trio(i) => State::Mixed(trio_state(i)),
        }
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Codeword::Quartet(i) => write!(f, "psi{}", i.0),
            Codeword::Trio(i) => write!(f, "rho{}", i.0),
        }
    }
}

/// An announced pair: `zero` encodes bit 0 and `one` encodes bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodewordPair {
    zero: Codeword,
    one: Codeword,
}

impl CodewordPair {
    pub fn new(zero: Codeword, one: Codeword) -> Result<Self, CodewordError> {
        if zero == one || zero.photon_count() != one.photon_count() {
            return Err(CodewordError::Pair);
        }
        Ok(Self { zero, one })
    }

    /// Trit 0 → (1,2), 1 → (2,3), 2 → (3,1).
    pub fn quartet_for_trit(trit: u8) -> Result<Self, CodewordError> {
        let (x, y) = trit_labels(trit)?;
        Self::new(
            Codeword::Quartet(QuartetIndex(x)),
            Codeword::Quartet(QuartetIndex(y)),
        )
    }

    pub fn trio_for_trit(trit: u8) -> Result<Self, CodewordError> {
        let (x, y) = trit_labels(trit)?;
        Self::new(Codeword::Trio(TrioIndex(x)), Codeword::Trio(TrioIndex(y)))
    }

    /// The trio pair obtained when photon `discarded` is removed from both
    /// members of a quartet pair.
    pub fn after_discard(self, discarded: usize) -> Result<Self, CodewordError> {
        let map = |c: Codeword| match c {
            Codeword::Quartet(i) => trio_after_discard(i, discarded).map(Codeword::Trio),
            Codeword::Trio(_) => Err(CodewordError::Pair),
        };
        Self::new(map(self.zero)?, map(self.one)?)
    }

    pub fn zero(self) -> Codeword {
        self.zero
    }

    pub fn one(self) -> Codeword {
        self.one
    }

    pub fn for_bit(self, bit: u8) -> Codeword {
        if bit == 0 {
            self.zero
        } else {
            self.one
        }
    }

    pub fn photon_count(self) -> usize {
        self.zero.photon_count()
    }
}

fn trit_labels(trit: u8) -> Result<(u8, u8), CodewordError> {
    match trit {
        0 => Ok((1, 2)),
        1 => Ok((2, 3)),
        2 => Ok((3, 1)),
        other => Err(CodewordError::Index(other)),
    }
}
