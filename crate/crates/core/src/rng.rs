//! Seeded, stream-separated random number generation.
//!
//! Every random quantity in the crate is drawn from an explicit [`RngStream`].
//! Two streams with the same `(seed, stream)` pair produce the same sequence
//! bit for bit; replicates that run in parallel use distinct stream ids.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// A child stream addressed by a list of small indices (replicate,
    /// epsilon index, mechanism index, ...). Distinct paths give distinct
    /// stream ids as long as each component is below 2^16.
    pub fn substream(&self, path: &[u64]) -> Self {
        let mut id = self.stream;
        for &part in path {
            id = id.wrapping_mul(1 << 16).wrapping_add(part + 1);
        }
        Self::new(self.seed, id)
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}
