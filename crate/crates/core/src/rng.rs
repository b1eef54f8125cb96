//! Seeded random streams.
//!
//! Every randomized stage derives its generator from one root seed plus a
//! stream counter, so results never depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Two-level substream, e.g. (stage, item).
pub fn substream2(seed: u64, stage: u64, item: u64) -> Rng {
    substream(seed, (stage << 40) ^ item)
}
