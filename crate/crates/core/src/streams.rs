//! Counter-based random streams derived from one master seed.
//!
//! Every consumer gets its own ChaCha stream keyed by `(domain, index)`, so
//! a round's randomness does not depend on how many other rounds ran first.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type RandomStream = ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Domain {
    Alice = 1,
    Channel = 2,
    Eve = 3,
    Bob = 4,
    TestSubset = 5,
    Reconcile = 6,
    Amplify = 7,
    Walk = 8,
    Verify = 9,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSplitter {
    master: u64,
}

impl SeedSplitter {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// Independent stream for `index` within `domain`; `index` must fit in 56 bits.
    pub fn stream(&self, domain: Domain, index: u64) -> RandomStream {
        debug_assert!(index < 1 << 56);
        let mut rng = ChaCha20Rng::seed_from_u64(self.master);
        rng.set_stream(((domain as u64) << 56) | index);
        rng
    }
}
