//! Sessions with three-photon codewords, prepared directly or by
//! discarding one photon of a quartet.
//!
//! ```bash
//! cargo run --example trio_session
//! ```

use singlet_qkd::channel::{ChannelConfig, NoiseMode};
use singlet_qkd::protocol::{run_session, ProtocolConfig, Variant};

fn main() {
    for variant in [Variant::Trio, Variant::TrioViaDiscard] {
        let cfg = ProtocolConfig {
            variant,
            n: 300,
            channel: ChannelConfig {
                noise_mode: NoiseMode::CollectiveRandomWalk,
                walk_step: 0.5,
                ..Default::default()
            },
            ..Default::default()
        };
        let out = run_session(&cfg, 3).unwrap();
        let r = &out.report;
        println!(
            "{variant}: sifted {} of {}, qber {}, key {} bits, keys match {}",
            r.sifted_length,
            r.rounds_sent,
            r.test_qber,
            r.final_key_length,
            out.alice_key == out.bob_key
        );
    }
}
