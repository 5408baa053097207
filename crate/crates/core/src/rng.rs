//! Counter-based random substreams.
//!
//! Trial `i` always draws from stream `i` of a ChaCha8 generator keyed by the
//! run seed, so results do not depend on how trials are split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub(crate) struct StreamFactory {
    key: [u8; 32],
}

impl StreamFactory {
    /// `domain` separates generators that share a user seed.
    pub(crate) fn new(seed: u64, domain: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&domain.to_le_bytes());
        key[16..24].copy_from_slice(&0x9e37_79b9_7f4a_7c15u64.to_le_bytes());
        Self { key }
    }

    pub(crate) fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}
