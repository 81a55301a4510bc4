//! Privacy amplification with a seeded random binary matrix, and exact
//! accounting of what linear side information reveals about its output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use super::KeyMaterial;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AmplifyError {
    #[error("no secret key remains (length {len}, qber {qber}, leakage {leakage})")]
    KeyRateExhausted { len: usize, qber: f64, leakage: usize },
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Output length `max(0, ⌊len·(1 − h₂(qber)) − leakage − margin⌋)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PaRate {
    pub security_margin: usize,
}

impl Default for PaRate {
    fn default() -> Self {
        Self { security_margin: 64 }
    }
}

impl PaRate {
    pub fn key_length(&self, len: usize, qber: f64, leakage: usize) -> usize {
        let raw = len as f64 * (1.0 - binary_entropy(qber)) - leakage as f64 - self.security_margin as f64;
        if raw <= 0.0 {
            0
        } else {
            raw.floor() as usize
        }
    }
}

/// A row of GF(2) values packed into words.
pub type BitRow = Vec<u64>;

fn words(cols: usize) -> usize {
    cols.div_ceil(64)
}

fn row_from_positions(positions: &[usize], cols: usize) -> BitRow {
    let mut row = vec![0u64; words(cols)];
    for &p in positions {
        row[p / 64] ^= 1 << (p % 64);
    }
    row
}

/// Rank over GF(2).
pub fn gf2_rank(mut rows: Vec<BitRow>) -> usize {
    let Some(width) = rows.first().map(|r| r.len() * 64) else {
        return 0;
    };
    let mut rank = 0;
    for col in 0..width {
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & bit != 0 {
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// An `out × in` binary matrix drawn uniformly from a public seed; the
/// family of all such matrices is universal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashMatrix {
    rows: Vec<BitRow>,
    cols: usize,
}

impl HashMatrix {
    pub fn random(out_len: usize, in_len: usize, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let w = words(in_len);
        let tail = in_len % 64;
        let rows = (0..out_len)
            .map(|_| {
                let mut row: BitRow = (0..w).map(|_| rng.random()).collect();
                if tail != 0 {
                    row[w - 1] &= (1u64 << tail) - 1;
                }
                row
            })
            .collect();
        Self { rows, cols: in_len }
    }

    pub fn output_len(&self) -> usize {
        self.rows.len()
    }

    pub fn input_len(&self) -> usize {
        self.cols
    }

    pub fn apply(&self, bits: &[u8]) -> Vec<u8> {
        assert_eq!(bits.len(), self.cols, "hash input length");
        let input = row_from_positions(
            &bits.iter().enumerate().filter(|(_, &b)| b == 1).map(|(i, _)| i).collect::<Vec<_>>(),
            self.cols,
        );
        self.rows
            .iter()
            .map(|row| (row.iter().zip(&input).map(|(a, b)| (a & b).count_ones()).sum::<u32>() % 2) as u8)
            .collect()
    }

    fn restricted(&self, keep: &[usize]) -> Vec<BitRow> {
        self.rows
            .iter()
            .map(|row| {
                let mut out = vec![0u64; words(keep.len())];
                for (j, &c) in keep.iter().enumerate() {
                    if row[c / 64] >> (c % 64) & 1 == 1 {
                        out[j / 64] |= 1 << (j % 64);
                    }
                }
                out
            })
            .collect()
    }
}

/// `I(Mx ; side information)` in bits for uniform `x`, when Eve knows the
/// positions flagged in `known` and the parities over each set in `disclosed`.
///
/// With the known columns eliminated this equals
/// `rank(M) + rank(P_U) − rank([P_U; M_U])`, where `_U` restricts to the
/// unknown columns.
pub fn eve_information(matrix: &HashMatrix, known: &[bool], disclosed: &[Vec<usize>]) -> usize {
    assert_eq!(known.len(), matrix.cols, "knowledge mask length");
    let rank_m = gf2_rank(matrix.rows.clone());
    let unknown: Vec<usize> = (0..matrix.cols).filter(|&c| !known[c]).collect();
    if unknown.is_empty() {
        return rank_m;
    }
    let mut index = vec![usize::MAX; matrix.cols];
    for (j, &c) in unknown.iter().enumerate() {
        index[c] = j;
    }
    let parities: Vec<BitRow> = disclosed
        .iter()
        .map(|set| {
            let cols: Vec<usize> = set.iter().filter(|&&c| !known[c]).map(|&c| index[c]).collect();
            row_from_positions(&cols, unknown.len())
        })
        .collect();
    let rank_p = gf2_rank(parities.clone());
    let mut joint = parities;
    joint.extend(matrix.restricted(&unknown));
    let rank_joint = gf2_rank(joint);
    rank_m + rank_p - rank_joint
}

/// Compresses `bits` to the length allowed by `rate`, using the matrix
/// drawn from `hash_seed`.
pub fn privacy_amplify(
    bits: &[u8],
    leakage: usize,
    qber: f64,
    rate: PaRate,
    hash_seed: u64,
) -> Result<(KeyMaterial, HashMatrix), AmplifyError> {
    let out = rate.key_length(bits.len(), qber, leakage);
    if out == 0 {
        return Err(AmplifyError::KeyRateExhausted {
            len: bits.len(),
            qber,
            leakage,
        });
    }
    let matrix = HashMatrix::random(out, bits.len(), hash_seed);
    Ok((KeyMaterial::new(matrix.apply(bits)), matrix))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.11) - 0.4999).abs() < 1e-3);
    }

    #[test]
    fn key_length_formula() {
        let rate = PaRate::default();
        assert_eq!(rate.key_length(1000, 0.0, 0), 936);
        assert_eq!(rate.key_length(1000, 0.5, 0), 0);
        assert_eq!(rate.key_length(100, 0.0, 50), 0);
        // 1000·(1 − h₂(0.01)) − 20 − 64 = 1000·0.919206… − 84
        assert_eq!(rate.key_length(1000, 0.01, 20), 835);
    }

    #[test]
    fn exhausted_rate_aborts() {
        let bits = vec![1u8; 100];
        assert!(privacy_amplify(&bits, 0, 0.5, PaRate::default(), 1).is_err());
    }

    #[test]
    fn same_seed_same_key() {
        let bits: Vec<u8> = (0..500).map(|i| (i * 7 % 3 == 0) as u8).collect();
        let (a, _) = privacy_amplify(&bits, 10, 0.0, PaRate::default(), 99).unwrap();
        let (b, _) = privacy_amplify(&bits, 10, 0.0, PaRate::default(), 99).unwrap();
        let (c, _) = privacy_amplify(&bits, 10, 0.0, PaRate::default(), 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 426);
    }

    #[test]
    fn rank_basics() {
        assert_eq!(gf2_rank(vec![]), 0);
        assert_eq!(gf2_rank(vec![vec![0b011], vec![0b110], vec![0b101]]), 2);
        assert_eq!(gf2_rank(vec![vec![0b001], vec![0b010], vec![0b100]]), 3);
    }

    #[test]
    fn eve_information_extremes() {
        let m = HashMatrix::random(10, 40, 5);
        assert_eq!(eve_information(&m, &[true; 40], &[]), 10);
        assert_eq!(eve_information(&m, &[false; 40], &[]), 0);
        // Knowing 25 of 40 inputs leaves 15 unknown columns covering a
        // rank-10 output, so nothing leaks.
        let mut known = vec![false; 40];
        known[..25].fill(true);
        assert_eq!(eve_information(&m, &known, &[]), 0);
        // Parities over every single unknown position reveal everything.
        let singles: Vec<Vec<usize>> = (25..40).map(|c| vec![c]).collect();
        assert_eq!(eve_information(&m, &known, &singles), 10);
    }

    #[test]
    fn eve_information_matches_brute_force() {
        // Small case: enumerate all inputs consistent with Eve's view and
        // measure the output entropy reduction directly.
        let m = HashMatrix::random(3, 6, 11);
        let known = [true, false, false, true, false, false];
        let disclosed = vec![vec![1, 2], vec![0, 4, 5]];
        let output = |x: u32| -> Vec<u8> {
            let bits: Vec<u8> = (0..6).map(|i| ((x >> i) & 1) as u8).collect();
            m.apply(&bits)
        };
        let parity = |x: u32, set: &[usize]| set.iter().fold(0, |a, &i| a ^ ((x >> i) & 1));
        let view = |x: u32| -> (u32, u32, Vec<u32>) {
            (x & 1, (x >> 3) & 1, disclosed.iter().map(|s| parity(x, s)).collect())
        };
        use std::collections::{HashMap, HashSet};
        let total: HashSet<Vec<u8>> = (0..64).map(output).collect();
        let mut classes: HashMap<(u32, u32, Vec<u32>), HashSet<Vec<u8>>> = HashMap::new();
        for x in 0..64 {
            classes.entry(view(x)).or_default().insert(output(x));
        }
        // Linear maps: every view class has the same number of outputs.
        let per_class = classes.values().next().unwrap().len();
        assert!(classes.values().all(|c| c.len() == per_class));
        let info = (total.len() as f64).log2() - (per_class as f64).log2();
        assert_eq!(eve_information(&m, &known, &disclosed), info.round() as usize);
    }
}
