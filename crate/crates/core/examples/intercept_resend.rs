//! Alarm rates under intercept-resend for each basis policy.
//!
//! ```bash
//! cargo run --release --example intercept_resend
//! ```

use singlet_qkd::adversary::{AttackKind, BasisPolicy};
use singlet_qkd::protocol::{simulate_rounds, ProtocolConfig, Variant};

fn main() {
    for variant in [Variant::Quartet, Variant::Trio] {
        for policy in [BasisPolicy::Rectilinear, BasisPolicy::Diagonal, BasisPolicy::PerRoundRandom] {
            let cfg = ProtocolConfig {
                variant,
                attack: AttackKind::InterceptResend(policy),
                ..Default::default()
            };
            let s = simulate_rounds(&cfg, 50_000, 1, None).unwrap();
            println!(
                "{variant:8} {policy:?}: conclusive {:.4}  tamper {:.4}  wrong bit {:.4}  alarm {:.4}",
                s.conclusive_rate(),
                s.tamper as f64 / s.complete() as f64,
                s.errors as f64 / s.complete() as f64,
                s.alarm_rate()
            );
        }
    }
}
