//! The fiber: collective polarization noise plus i.i.d. photon loss.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qmath::{haar_su2, QuantumState, QubitUnitary, State};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("loss probability {0} is outside [0, 1]")]
    LossProbability(f64),
    #[error("walk step {0} must be finite and non-negative")]
    WalkStep(f64),
}

/// One transmitted multiplet. `state` covers only the surviving photons, in
/// transmission order; it is `None` once every photon is lost.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipletPayload {
    state: Option<State>,
    photon_count: usize,
    lost: Vec<bool>,
    round_id: u64,
}

impl MultipletPayload {
    pub fn new(state: State, round_id: u64) -> Self {
        let photon_count = state.n_qubits();
        Self {
            state: Some(state),
            photon_count,
            lost: vec![false; photon_count],
            round_id,
        }
    }

    /// A multiplet that never arrives.
    pub fn vanished(photon_count: usize, round_id: u64) -> Self {
        Self {
            state: None,
            photon_count,
            lost: vec![true; photon_count],
            round_id,
        }
    }

    pub fn state(&self) -> Option<&State> {
        self.state.as_ref()
    }

    pub fn photon_count(&self) -> usize {
        self.photon_count
    }

    pub fn round_id(&self) -> u64 {
        self.round_id
    }

    pub fn lost_flags(&self) -> &[bool] {
        &self.lost
    }

    pub fn is_complete(&self) -> bool {
        !self.lost.iter().any(|&l| l)
    }

    /// Marks the listed photons (1-based) lost and traces them out.
    pub fn lose(&mut self, positions: &[usize]) {
        let newly: Vec<usize> = positions
            .iter()
            .copied()
            .filter(|&p| (1..=self.photon_count).contains(&p) && !self.lost[p - 1])
            .collect();
        if newly.is_empty() {
            return;
        }
        let survivors: Vec<usize> = (1..=self.photon_count).filter(|&p| !self.lost[p - 1]).collect();
        let keep: Vec<usize> = survivors
            .iter()
            .enumerate()
            .filter(|(_, p)| !newly.contains(p))
            .map(|(j, _)| j)
            .collect();
        for p in newly {
            self.lost[p - 1] = true;
        }
        self.state = match (&self.state, keep.is_empty()) {
            (Some(s), false) => Some(s.reduce(&keep).expect("kept indices are valid")),
            _ => None,
        };
    }
}

/// Positions (1-based, in transmission order) of photons that did not arrive.
pub fn loss_mask(payload: &MultipletPayload) -> Vec<usize> {
    payload
        .lost
        .iter()
        .enumerate()
        .filter(|(_, &l)| l)
        .map(|(i, _)| i + 1)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// A fresh Haar rotation per multiplet, shared by its photons.
    CollectivePerMultiplet,
    /// One rotation shared by each multiplet, drifting between multiplets.
    CollectiveRandomWalk,
    /// Independent Haar rotations per photon; breaks the collective model.
    IndependentPerPhoton,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub noise_mode: NoiseMode,
    /// Rotation angle per multiplet in the random-walk mode, radians.
    pub walk_step: f64,
    /// Independent per-photon loss probability.
    pub loss_probability: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            noise_mode: NoiseMode::CollectivePerMultiplet,
            walk_step: 0.0,
            loss_probability: 0.0,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(0.0..=1.0).contains(&self.loss_probability) {
            return Err(ChannelError::LossProbability(self.loss_probability));
        }
        if !(self.walk_step.is_finite() && self.walk_step >= 0.0) {
            return Err(ChannelError::WalkStep(self.walk_step));
        }
        Ok(())
    }

    /// Probability that a multiplet of `photons` loses at least one photon.
    pub fn multiplet_loss(&self, photons: usize) -> f64 {
        1.0 - (1.0 - self.loss_probability).powi(photons as i32)
    }

    /// Per-photon loss giving multiplet loss `budget` for `photons` photons.
    pub fn loss_for_multiplet_budget(budget: f64, photons: usize) -> f64 {
        1.0 - (1.0 - budget).powf(1.0 / photons as f64)
    }
}

/// Channel instance; carries the drifting rotation of the random-walk mode.
#[derive(Debug, Clone)]
pub struct Channel {
    cfg: ChannelConfig,
    drift: QubitUnitary,
}

impl Channel {
    pub fn new(cfg: ChannelConfig) -> Result<Self, ChannelError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            drift: QubitUnitary::identity(),
        })
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    /// Current rotation of the random-walk mode.
    pub fn drift(&self) -> &QubitUnitary {
        &self.drift
    }

    pub fn transmit<R: Rng + ?Sized>(&mut self, payload: MultipletPayload, rng: &mut R) -> MultipletPayload {
        let payload = self.apply_noise(payload, rng);
        self.apply_loss(payload, rng)
    }

    pub fn apply_noise<R: Rng + ?Sized>(&mut self, mut payload: MultipletPayload, rng: &mut R) -> MultipletPayload {
        let Some(state) = payload.state.take() else {
            return payload;
        };
        let n = state.n_qubits();
        let ops: Option<Vec<QubitUnitary>> = match self.cfg.noise_mode {
            NoiseMode::None => None,
            NoiseMode::CollectivePerMultiplet => Some(vec![haar_su2(rng); n]),
            NoiseMode::CollectiveRandomWalk => {
                let step = random_axis_rotation(self.cfg.walk_step, rng);
                self.drift = step.compose(&self.drift);
                Some(vec![self.drift; n])
            }
            NoiseMode::IndependentPerPhoton => Some((0..n).map(|_| haar_su2(rng)).collect()),
        };
        payload.state = Some(match ops {
            Some(ops) => state.apply_local(&ops).expect("one operator per photon"),
            None => state,
        });
        payload
    }

    pub fn apply_loss<R: Rng + ?Sized>(&self, mut payload: MultipletPayload, rng: &mut R) -> MultipletPayload {
        let p = self.cfg.loss_probability;
        let lost: Vec<usize> = (1..=payload.photon_count)
            .filter(|_| rng.random::<f64>() < p)
            .collect();
        payload.lose(&lost);
        payload
    }
}

/// Stateless transmission; a random-walk channel starts from the identity.
pub fn transmit<R: Rng + ?Sized>(
    payload: MultipletPayload,
    cfg: &ChannelConfig,
    rng: &mut R,
) -> Result<MultipletPayload, ChannelError> {
    Ok(Channel::new(*cfg)?.transmit(payload, rng))
}

fn random_axis_rotation<R: Rng + ?Sized>(angle: f64, rng: &mut R) -> QubitUnitary {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    QubitUnitary::rotation([r * phi.cos(), r * phi.sin(), z], angle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codewords::{quartet_state, trio_state, QuartetIndex, TrioIndex};
    use crate::qmath::{partial_trace, ACCUMULATED_TOL, ALGEBRAIC_TOL};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn cfg(noise_mode: NoiseMode, loss: f64) -> ChannelConfig {
        ChannelConfig {
            noise_mode,
            walk_step: 0.3,
            loss_probability: loss,
        }
    }

    fn psi(i: u8) -> State {
        State::Pure(quartet_state(QuartetIndex::new(i).unwrap()))
    }

    #[test]
    fn identity_channel() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let out = transmit(MultipletPayload::new(psi(2), 7), &cfg(NoiseMode::None, 0.0), &mut rng).unwrap();
        assert_eq!(out.state(), Some(&psi(2)));
        assert_eq!(out.round_id(), 7);
        assert!(loss_mask(&out).is_empty());
    }

    #[test]
    fn collective_modes_preserve_codewords() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for mode in [NoiseMode::CollectivePerMultiplet, NoiseMode::CollectiveRandomWalk] {
            let mut ch = Channel::new(cfg(mode, 0.0)).unwrap();
            for round in 0..100 {
                let out = ch.transmit(MultipletPayload::new(psi(2), round), &mut rng);
                assert!(out.state().unwrap().distance(&psi(2)).unwrap() < ACCUMULATED_TOL);
                let rho = State::Mixed(trio_state(TrioIndex::new(2).unwrap()));
                let out = ch.transmit(MultipletPayload::new(rho.clone(), round), &mut rng);
                assert!(out.state().unwrap().distance(&rho).unwrap() < ACCUMULATED_TOL);
            }
        }
    }

    #[test]
    fn random_walk_drifts() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let mut ch = Channel::new(cfg(NoiseMode::CollectiveRandomWalk, 0.0)).unwrap();
        ch.transmit(MultipletPayload::new(psi(1), 0), &mut rng);
        let first = *ch.drift();
        ch.transmit(MultipletPayload::new(psi(1), 1), &mut rng);
        assert_ne!(first, *ch.drift());
        assert!(ch.drift().unitarity_defect() < ALGEBRAIC_TOL);
    }

    #[test]
    fn full_and_zero_loss() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let all = transmit(MultipletPayload::new(psi(1), 0), &cfg(NoiseMode::None, 1.0), &mut rng).unwrap();
        assert_eq!(loss_mask(&all), vec![1, 2, 3, 4]);
        assert!(all.state().is_none());
        for _ in 0..50 {
            let none = transmit(MultipletPayload::new(psi(1), 0), &cfg(NoiseMode::None, 0.0), &mut rng).unwrap();
            assert!(none.is_complete());
        }
    }

    #[test]
    fn loss_rate_matches_probability() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let p = 0.3;
        let c = cfg(NoiseMode::None, p);
        let trials = 5000;
        let lost: usize = (0..trials)
            .map(|r| loss_mask(&transmit(MultipletPayload::new(psi(3), r), &c, &mut rng).unwrap()).len())
            .sum();
        let photons = (trials * 4) as f64;
        let sigma = (p * (1.0 - p) / photons).sqrt();
        assert!((lost as f64 / photons - p).abs() < 5.0 * sigma);
    }

    #[test]
    fn survivors_hold_analytic_partial_trace() {
        let mut p = MultipletPayload::new(psi(1), 0);
        p.lose(&[2]);
        let expect = partial_trace(&quartet_state(QuartetIndex::new(1).unwrap()).to_density(), &[0, 2, 3]).unwrap();
        let got = p.state().unwrap().to_density();
        assert!(got.max_abs_diff(&expect).unwrap() < ALGEBRAIC_TOL);
        // Losing photon 4 next traces out what is now the last survivor.
        p.lose(&[4, 2]);
        let expect = partial_trace(&expect, &[0, 1]).unwrap();
        assert!(p.state().unwrap().to_density().max_abs_diff(&expect).unwrap() < ALGEBRAIC_TOL);
        assert_eq!(loss_mask(&p), vec![2, 4]);
    }

    #[test]
    fn deterministic_given_seed() {
        let c = cfg(NoiseMode::IndependentPerPhoton, 0.2);
        let a = transmit(MultipletPayload::new(psi(1), 0), &c, &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
        let b = transmit(MultipletPayload::new(psi(1), 0), &c, &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        assert!(Channel::new(cfg(NoiseMode::None, 1.5)).is_err());
        let mut c = cfg(NoiseMode::None, 0.0);
        c.walk_step = -1.0;
        assert!(c.validate().is_err());
        let p = ChannelConfig::loss_for_multiplet_budget(0.5, 4);
        let c = ChannelConfig { loss_probability: p, ..c };
        assert!((c.multiplet_loss(4) - 0.5).abs() < 1e-12);
    }
}
