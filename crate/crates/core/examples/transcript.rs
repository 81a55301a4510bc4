//! The classical discussion of a short session as JSON lines.
//!
//! ```bash
//! cargo run --example transcript
//! ```

use singlet_qkd::protocol::{run_session, ProtocolConfig, Variant};

fn main() {
    let cfg = ProtocolConfig {
        variant: Variant::TrioViaDiscard,
        n: 30,
        pa_rate: singlet_qkd::protocol::amplify::PaRate { security_margin: 0 },
        ..Default::default()
    };
    let out = run_session(&cfg, 2).unwrap();
    print!("{}", out.transcript.to_lines());
}
