use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Identifier of the stream derivation below, written next to every result
/// that depends on random draws.
pub const RNG_ALGORITHM: &str = "chacha20-seed_from_u64-stream-v1";

/// A reproducible random stream: ChaCha20 keyed by `master_seed`, with
/// `stream_id` selecting the 64-bit stream (nonce). Distinct stream ids give
/// non-overlapping keystreams under the same key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Child stream keyed by this stream's position, for nested work such as
    /// per-block Monte Carlo draws.
    pub fn child(&self, index: u64) -> Self {
        Self {
            master_seed: self.master_seed ^ self.stream_id.rotate_left(17) ^ 0x9E37_79B9_7F4A_7C15,
            stream_id: index,
        }
    }
}
