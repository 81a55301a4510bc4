//! Reference values computed without the library's state machinery.
//!
//! A singlet measured photon-by-photon in any common basis gives the two
//! antiparallel outcomes with probability 1/2 each, so every codeword's
//! outcome law is a product over its singlet pairs times 1/2 per mixed
//! photon. Everything below is built on that formula.

#![allow(dead_code)]

use std::f64::consts::FRAC_1_SQRT_2;

/// 1-based photon pairs of each quartet codeword.
pub const QUARTET_PAIRS: [[(usize, usize); 2]; 3] = [[(1, 2), (3, 4)], [(1, 3), (2, 4)], [(1, 4), (2, 3)]];

/// 1-based singlet pair of each trio codeword.
pub const TRIO_PAIRS: [(usize, usize); 3] = [(1, 2), (1, 3), (2, 3)];

/// Codeword indices (1-based) of the ordered pair selected by a trit.
pub const TRIT_MEMBERS: [(usize, usize); 3] = [(1, 2), (2, 3), (3, 1)];

/// An abstract codeword: photon count and singlet pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    pub photons: usize,
    pub pairs: Vec<(usize, usize)>,
}

pub fn quartet(i: usize) -> Diagram {
    Diagram {
        photons: 4,
        pairs: QUARTET_PAIRS[i - 1].to_vec(),
    }
}

pub fn trio(i: usize) -> Diagram {
    Diagram {
        photons: 3,
        pairs: vec![TRIO_PAIRS[i - 1]],
    }
}

pub fn bits(value: usize, photons: usize) -> Vec<u8> {
    (0..photons).map(|p| ((value >> (photons - 1 - p)) & 1) as u8).collect()
}

impl Diagram {
    pub fn antiparallel(&self, bits: &[u8]) -> bool {
        self.pairs.iter().all(|&(p, q)| bits[p - 1] != bits[q - 1])
    }

    /// Outcome probability in any common product basis.
    pub fn probability(&self, bits: &[u8]) -> f64 {
        if !self.antiparallel(bits) {
            return 0.0;
        }
        let mixed = self.photons - 2 * self.pairs.len();
        0.5f64.powi((self.pairs.len() + mixed) as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Bit(u8),
    Inconclusive,
    Tamper,
}

pub fn verdict(bits: &[u8], zero: &Diagram, one: &Diagram) -> Verdict {
    let weight = bits.iter().filter(|&&b| b == 1).count();
    let tamper = match bits.len() {
        4 => weight != 2,
        _ => weight == 0 || weight == bits.len(),
    };
    if tamper {
        return Verdict::Tamper;
    }
    match (zero.antiparallel(bits), one.antiparallel(bits)) {
        (true, false) => Verdict::Bit(0),
        (false, true) => Verdict::Bit(1),
        (true, true) => Verdict::Inconclusive,
        (false, false) => Verdict::Tamper,
    }
}

/// The ordered pair for `trit` at the given photon count.
pub fn pair_for_trit(trit: usize, photons: usize) -> (Diagram, Diagram) {
    let (z, o) = TRIT_MEMBERS[trit];
    if photons == 4 {
        (quartet(z), quartet(o))
    } else {
        (trio(z), trio(o))
    }
}

/// P(conclusive) for a uniformly chosen member of the pair.
pub fn conclusive_probability(zero: &Diagram, one: &Diagram) -> f64 {
    let n = zero.photons;
    (0..1 << n)
        .map(|v| {
            let b = bits(v, n);
            match verdict(&b, zero, one) {
                Verdict::Bit(_) => 0.5 * (zero.probability(&b) + one.probability(&b)),
                _ => 0.0,
            }
        })
        .sum()
}

/// Per-round alarm probability (tamper verdict, or conclusive with the
/// wrong bit) when Eve measures in a uniformly random common basis and
/// resends the product state, and Bob measures in his own random basis.
/// Crossed bases leave Bob's outcome uniform.
pub fn intercept_resend_alarm_rate(photons: usize) -> f64 {
    let outcomes = 1usize << photons;
    let mut rate = 0.0;
    for trit in 0..3 {
        let (zero, one) = pair_for_trit(trit, photons);
        for (bit, sent) in [(0u8, &zero), (1u8, &one)] {
            for eve_outcome in 0..outcomes {
                let p_eve = sent.probability(&bits(eve_outcome, photons));
                if p_eve == 0.0 {
                    continue;
                }
                let alarm = |v: usize| match verdict(&bits(v, photons), &zero, &one) {
                    Verdict::Tamper => 1.0,
                    Verdict::Bit(b) if b != bit => 1.0,
                    _ => 0.0,
                };
                let same = alarm(eve_outcome);
                let crossed = (0..outcomes).map(alarm).sum::<f64>() / outcomes as f64;
                rate += (1.0 / 6.0) * p_eve * 0.5 * (same + crossed);
            }
        }
    }
    rate
}

/// Real amplitudes of ψᵢ from its three-term decomposition.
pub fn quartet_amplitudes(i: usize) -> [f64; 16] {
    let sym = |x: usize, y: usize| {
        let mut v = [0.0; 16];
        v[x] = FRAC_1_SQRT_2;
        v[y] = FRAC_1_SQRT_2;
        v
    };
    let a = sym(0b0101, 0b1010);
    let b = sym(0b0110, 0b1001);
    let c = sym(0b0011, 0b1100);
    let (p, m) = match i {
        1 => (a, b),
        2 => (c, b),
        _ => (a, c),
    };
    std::array::from_fn(|k| FRAC_1_SQRT_2 * (p[k] - m[k]))
}

/// Mean and standard error of a Bernoulli estimate.
pub fn sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}
