//! Outcome law and Bob's verdict for every outcome of one codeword pair.
//!
//! ```bash
//! cargo run --example discrimination -- 1
//! ```

use singlet_qkd::codewords::CodewordPair;
use singlet_qkd::decoder::{classify, BasisChoice};
use singlet_qkd::qmath::outcome_distribution;

fn main() {
    let trit: u8 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    for pair in [CodewordPair::quartet_for_trit(trit).unwrap(), CodewordPair::trio_for_trit(trit).unwrap()] {
        println!("pair ({}, {}), diagonal basis", pair.zero(), pair.one());
        let basis = BasisChoice::Diagonal.as_unitary();
        let p0 = outcome_distribution(&pair.zero().state(), &basis);
        let p1 = outcome_distribution(&pair.one().state(), &basis);
        for (outcome, a) in &p0 {
            let verdict = classify(outcome, &pair).unwrap();
            println!("  {outcome}  P0={a:.3}  P1={:.3}  {verdict:?}", p1[outcome]);
        }
    }
}
