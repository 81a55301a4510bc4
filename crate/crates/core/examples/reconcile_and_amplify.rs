//! Error correction and privacy amplification on a synthetic noisy string.
//!
//! ```bash
//! cargo run --example reconcile_and_amplify
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use singlet_qkd::protocol::amplify::{privacy_amplify, PaRate};
use singlet_qkd::protocol::reconcile::{reconcile, ReconcileParams};

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let len = 4000;
    for qber in [0.0, 0.01, 0.03, 0.05] {
        let alice: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
        let bob: Vec<u8> = alice.iter().map(|&b| b ^ u8::from(rng.random::<f64>() < qber)).collect();
        let errors = alice.iter().zip(&bob).filter(|(a, b)| a != b).count();
        match reconcile(&alice, &bob, qber, ReconcileParams::default(), &mut rng) {
            Ok(r) => {
                let key = privacy_amplify(&alice, r.leakage, qber, PaRate::default(), 99).map(|(k, _)| k.len());
                println!(
                    "qber {qber}: {errors} errors, {} passes, {} parities leaked, final key {:?}",
                    r.passes, r.leakage, key
                );
            }
            Err(e) => println!("qber {qber}: {e}"),
        }
    }
}
