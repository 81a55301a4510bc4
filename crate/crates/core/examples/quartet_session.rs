//! One full session with four-photon codewords over a noisy line.
//!
//! ```bash
//! cargo run --example quartet_session -- 42
//! ```

use singlet_qkd::cli::{format_report, OutputFormat};
use singlet_qkd::protocol::{run_session, ProtocolConfig};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let out = run_session(&ProtocolConfig::default(), seed).expect("valid config");
    print!("{}", format_report(&out.report, OutputFormat::Text));
    assert_eq!(out.alice_key, out.bob_key);
    let key = out.alice_key.to_string();
    println!("key prefix {}", &key[..key.len().min(64)]);
}
