//! Interactive parity-bisection reconciliation.
//!
//! Each pass shuffles positions with public randomness, splits them into
//! blocks and compares block parities. A mismatching block is bisected until
//! the single flipped position is found and Bob corrects it. Block size
//! doubles from pass to pass. A final exchange of random-subset parities
//! catches residual errors; each such parity misses a nonzero error pattern
//! with probability 1/2.
//!
//! Leakage counts the parities Alice discloses. Every disclosed parity is
//! kept as the set of positions it covers so that an eavesdropper's
//! knowledge can be computed exactly afterwards.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReconcileError {
    #[error("strings differ in length: {alice} vs {bob}")]
    LengthMismatch { alice: usize, bob: usize },
    #[error("residual mismatch after reconciliation ({leakage} parities disclosed)")]
    ResidualMismatch { leakage: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconcileParams {
    /// Random-subset parities in the final check.
    pub check_parities: usize,
    pub max_passes: usize,
}

impl Default for ReconcileParams {
    fn default() -> Self {
        Self {
            check_parities: 20,
            max_passes: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconciliation {
    pub corrected: Vec<u8>,
    pub leakage: usize,
    pub passes: usize,
    /// Positions covered by each parity Alice disclosed.
    pub disclosed: Vec<Vec<usize>>,
}

struct Exchange<'a> {
    alice: &'a [u8],
    bob: Vec<u8>,
    disclosed: Vec<Vec<usize>>,
    /// Blocks of every pass so far, and for each pass the block holding each
    /// position.
    blocks: Vec<Vec<Vec<usize>>>,
    block_of: Vec<Vec<usize>>,
}

impl Exchange<'_> {
    fn parity(bits: &[u8], positions: &[usize]) -> u8 {
        positions.iter().fold(0, |acc, &i| acc ^ bits[i])
    }

    /// Alice discloses her parity over `positions`; true if Bob's differs.
    fn differs(&mut self, positions: &[usize]) -> bool {
        self.disclosed.push(positions.to_vec());
        self.mismatch(positions)
    }

    /// Compares against a parity Alice already disclosed.
    fn mismatch(&self, positions: &[usize]) -> bool {
        Self::parity(self.alice, positions) != Self::parity(&self.bob, positions)
    }

    /// Bisects a block with odd mismatch and returns the corrected position.
    fn bisect_and_fix(&mut self, block: &[usize]) -> usize {
        let mut span = block;
        while span.len() > 1 {
            let (left, right) = span.split_at(span.len() / 2);
            span = if self.differs(left) { left } else { right };
        }
        self.bob[span[0]] ^= 1;
        span[0]
    }

    /// Runs a pass over `order` split into `block`-sized chunks, then
    /// revisits earlier blocks whose parity each correction flipped.
    fn pass(&mut self, order: &[usize], block: usize) -> usize {
        let blocks: Vec<Vec<usize>> = order.chunks(block).map(<[usize]>::to_vec).collect();
        let mut block_of = vec![0; order.len()];
        for (b, chunk) in blocks.iter().enumerate() {
            for &i in chunk {
                block_of[i] = b;
            }
        }
        self.blocks.push(blocks);
        self.block_of.push(block_of);
        let current = self.blocks.len() - 1;

        let mut fixed = 0;
        let mut queue = Vec::new();
        for b in 0..self.blocks[current].len() {
            let chunk = self.blocks[current][b].clone();
            if self.differs(&chunk) {
                queue.push(self.bisect_and_fix(&chunk));
                fixed += 1;
            }
            while let Some(pos) = queue.pop() {
                for p in 0..self.blocks.len() {
                    if p == current && self.block_of[p][pos] > b {
                        continue;
                    }
                    let other = self.blocks[p][self.block_of[p][pos]].clone();
                    if self.mismatch(&other) {
                        queue.push(self.bisect_and_fix(&other));
                        fixed += 1;
                    }
                }
            }
        }
        fixed
    }

    /// Random-subset parity check; true when every parity agrees.
    fn check<R: Rng + ?Sized>(&mut self, count: usize, rng: &mut R) -> bool {
        let len = self.alice.len();
        let mut ok = true;
        for _ in 0..count {
            let subset: Vec<usize> = (0..len).filter(|_| rng.random::<bool>()).collect();
            ok &= !self.differs(&subset);
        }
        ok
    }
}

/// Initial block size for an estimated error rate; the whole string when no
/// errors are expected.
pub fn initial_block_size(len: usize, qber_hint: f64) -> usize {
    if qber_hint > 0.0 {
        ((0.73 / qber_hint).round() as usize).clamp(2, len.max(2))
    } else {
        len.max(1)
    }
}

pub fn reconcile<R: Rng + ?Sized>(
    alice: &[u8],
    bob: &[u8],
    qber_hint: f64,
    params: ReconcileParams,
    rng: &mut R,
) -> Result<Reconciliation, ReconcileError> {
    if alice.len() != bob.len() {
        return Err(ReconcileError::LengthMismatch {
            alice: alice.len(),
            bob: bob.len(),
        });
    }
    let len = alice.len();
    let mut ex = Exchange {
        alice,
        bob: bob.to_vec(),
        disclosed: Vec::new(),
        blocks: Vec::new(),
        block_of: Vec::new(),
    };
    let done = |ex: Exchange<'_>, passes| Reconciliation {
        leakage: ex.disclosed.len(),
        corrected: ex.bob,
        passes,
        disclosed: ex.disclosed,
    };
    if len == 0 {
        return Ok(done(ex, 0));
    }
    if qber_hint <= 0.0 && ex.check(params.check_parities, rng) {
        return Ok(done(ex, 0));
    }

    let first = initial_block_size(len, qber_hint);
    let mut order: Vec<usize> = (0..len).collect();
    let mut passes = 0;
    for pass in 0..params.max_passes {
        if pass > 0 {
            order.shuffle(rng);
        }
        let block = first.saturating_mul(1 << pass.min(20)).min(len);
        let fixed = ex.pass(&order, block);
        passes = pass + 1;
        if fixed == 0 {
            break;
        }
    }
    if ex.check(params.check_parities, rng) {
        Ok(done(ex, passes))
    } else {
        Err(ReconcileError::ResidualMismatch {
            leakage: ex.disclosed.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn random_bits(len: usize, rng: &mut ChaCha20Rng) -> Vec<u8> {
        (0..len).map(|_| rng.random_range(0..2)).collect()
    }

    fn flip(bits: &[u8], rate: f64, rng: &mut ChaCha20Rng) -> Vec<u8> {
        bits.iter().map(|&b| b ^ u8::from(rng.random::<f64>() < rate)).collect()
    }

    #[test]
    fn identical_strings_leak_only_the_check() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let a = random_bits(300, &mut rng);
        let r = reconcile(&a, &a, 0.0, ReconcileParams::default(), &mut rng).unwrap();
        assert_eq!(r.corrected, a);
        assert_eq!(r.leakage, 20);
        assert_eq!(r.passes, 0);
    }

    #[test]
    fn single_flip_located_within_bisection_bound() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let params = ReconcileParams::default();
        for pos in [0, 17, 128, 255] {
            let a = random_bits(256, &mut rng);
            let mut b = a.clone();
            b[pos] ^= 1;
            let r = reconcile(&a, &b, 0.0, params, &mut rng).unwrap();
            assert_eq!(r.corrected, a);
            // Bisection costs 2·log2(256); the constant covers the two
            // check rounds plus one clean confirmation parity per pass.
            let bound = 2 * 8 + 2 * params.check_parities + 2;
            assert!(r.leakage <= bound, "leakage {}", r.leakage);
        }
    }

    #[test]
    fn uncorrelated_strings_abort_or_leak_everything() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_bits(256, &mut rng);
            let b = random_bits(256, &mut rng);
            // Expecting no errors, a handful of full-length passes cannot
            // repair ~128 flips.
            let r = reconcile(&a, &b, 0.0, ReconcileParams::default(), &mut rng);
            assert!(matches!(r, Err(ReconcileError::ResidualMismatch { .. })));
            match reconcile(&a, &b, 0.5, ReconcileParams::default(), &mut rng) {
                Ok(r) => assert!(r.leakage >= 256, "leakage {}", r.leakage),
                Err(e) => assert!(matches!(e, ReconcileError::ResidualMismatch { .. })),
            }
        }
    }

    #[test]
    fn corrects_typical_error_rates() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let mut ok = 0;
        let trials = 200;
        for _ in 0..trials {
            let a = random_bits(1000, &mut rng);
            let b = flip(&a, 0.05, &mut rng);
            if let Ok(r) = reconcile(&a, &b, 0.05, ReconcileParams::default(), &mut rng) {
                assert_eq!(r.corrected, a);
                ok += 1;
            }
        }
        assert!(ok >= trials * 95 / 100, "{ok}/{trials}");
    }

    #[test]
    fn length_mismatch() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        assert!(matches!(
            reconcile(&[0, 1], &[0], 0.0, ReconcileParams::default(), &mut rng),
            Err(ReconcileError::LengthMismatch { .. })
        ));
    }
}
