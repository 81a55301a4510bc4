//! Codeword fidelity after collective and independent per-photon noise.
//!
//! ```bash
//! cargo run --example collective_noise
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use singlet_qkd::channel::{Channel, ChannelConfig, MultipletPayload, NoiseMode};
use singlet_qkd::codewords::{quartet_state, trio_state, QuartetIndex, TrioIndex};
use singlet_qkd::qmath::State;

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let trials = 2000;
    for mode in [
        NoiseMode::CollectivePerMultiplet,
        NoiseMode::CollectiveRandomWalk,
        NoiseMode::IndependentPerPhoton,
    ] {
        let mut line = Channel::new(ChannelConfig {
            noise_mode: mode,
            walk_step: 0.2,
            ..Default::default()
        })
        .unwrap();
        let psi = quartet_state(QuartetIndex::new(1).unwrap());
        let rho = State::Mixed(trio_state(TrioIndex::new(2).unwrap()));
        let (mut fid, mut dist) = (0.0, 0.0);
        for r in 0..trials {
            let out = line.transmit(MultipletPayload::new(State::Pure(psi.clone()), r), &mut rng);
            if let Some(State::Pure(v)) = out.state() {
                fid += psi.fidelity(v).unwrap();
            }
            let out = line.transmit(MultipletPayload::new(rho.clone(), r), &mut rng);
            dist += rho.distance(out.state().unwrap()).unwrap();
        }
        println!(
            "{mode:?}: mean psi1 fidelity {:.4}, mean rho2 trace distance {:.4}",
            fid / trials as f64,
            dist / trials as f64
        );
    }
}
