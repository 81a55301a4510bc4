//! Unambiguous discrimination hidden behind line loss.
//!
//! If the pair string is public before the photons fly, Eve discriminates
//! each multiplet, forwards a fresh codeword when she succeeds and blames
//! the rest on loss. Announcing after receipt forces her to guess the pair.
//!
//! ```bash
//! cargo run --example loss_hiding_attack
//! ```

use singlet_qkd::adversary::AttackKind;
use singlet_qkd::channel::ChannelConfig;
use singlet_qkd::protocol::{run_session, ProtocolConfig};

fn main() {
    let cfg = ProtocolConfig {
        n: 300,
        delta: 6.0,
        attack: AttackKind::Usd,
        channel: ChannelConfig {
            loss_probability: ChannelConfig::loss_for_multiplet_budget(0.5, 4),
            ..Default::default()
        },
        ..Default::default()
    };
    for early in [true, false] {
        let r = run_session(&ProtocolConfig { announce_b_early: early, ..cfg }, 5).unwrap().report;
        println!("announce_b_early = {early}");
        println!("  attack run      {} (refused: {})", r.attack, r.attack_refused);
        println!("  lost / sent     {} / {}", r.rounds_lost, r.rounds_sent);
        println!("  test qber       {}", r.test_qber);
        println!("  tamper count    {}", r.tamper_count);
        println!("  aborted         {} {:?}", r.aborted, r.abort_reason);
        println!("  key / eve knows {} / {:?}", r.final_key_length, r.eve_information);
    }
}
