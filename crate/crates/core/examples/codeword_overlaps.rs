//! Overlaps between the three quartet codewords and their shared span.
//!
//! ```bash
//! cargo run --example codeword_overlaps
//! ```

use singlet_qkd::codewords::{quartet_state, QuartetIndex};

fn main() {
    let psi = QuartetIndex::all().map(quartet_state);
    println!("Gram matrix <psi_i|psi_j>:");
    for a in &psi {
        let row: Vec<String> = psi.iter().map(|b| format!("{:+.6}", a.inner(b).unwrap().re)).collect();
        println!("  {}", row.join("  "));
    }
    // Two-dimensional span: psi1 - psi2 equals psi3.
    let amps: Vec<_> = psi[0]
        .amplitudes()
        .iter()
        .zip(psi[1].amplitudes())
        .zip(psi[2].amplitudes())
        .map(|((a, b), c)| (a - b - c).norm())
        .collect();
    println!("max |psi1 - psi2 - psi3| = {:.1e}", amps.iter().cloned().fold(0.0, f64::max));
}
