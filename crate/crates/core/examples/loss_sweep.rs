//! Monte Carlo sweep of per-photon loss, printed as CSV.
//!
//! ```bash
//! cargo run --release --example loss_sweep
//! ```

use singlet_qkd::cli::{format_sweep, sweep, SweepAxis};
use singlet_qkd::protocol::ProtocolConfig;

fn main() {
    let base = ProtocolConfig {
        n: 200,
        delta: 2.0,
        ..Default::default()
    };
    let values: Vec<String> = (0..=8).map(|k| format!("{:.3}", k as f64 * 0.025)).collect();
    let rows = sweep(&base, SweepAxis::LossProbability, &values, 16).unwrap();
    print!("{}", format_sweep(SweepAxis::LossProbability, &rows));
}
