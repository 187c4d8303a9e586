use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A master seed plus a replicate index. Each pair owns a family of
/// independent ChaCha streams, one per [`NoiseStream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master: u64,
    pub replicate: u64,
}

/// Fixed stream offsets for the independent noise sources of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum NoiseStream {
    /// The fractional driver `B^H`.
    Fractional = 0,
    /// The Brownian driver of a fast OU component.
    Brownian = 1,
    /// Monte Carlo draws that are not path noise.
    Auxiliary = 2,
}

const STREAM_BITS: u32 = 4;

impl SeedSpec {
    pub fn new(master: u64, replicate: u64) -> Self {
        Self { master, replicate }
    }

    /// Deterministic generator for `(master, replicate, stream)`. The
    /// ChaCha stream id is `replicate << 4 | stream`.
    pub fn rng(&self, stream: NoiseStream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream((self.replicate << STREAM_BITS) | stream as u64);
        rng
    }

    /// The same master seed at another replicate index.
    pub fn with_replicate(&self, replicate: u64) -> Self {
        Self {
            master: self.master,
            replicate,
        }
    }
}
