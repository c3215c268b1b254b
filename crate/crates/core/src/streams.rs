//! Reproducible random streams.
//!
//! Every replication draws from its own ChaCha8 stream keyed by
//! `(seed, replication)`, so results do not depend on how work is scheduled
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for replication `replication` of an experiment seeded with `seed`.
pub fn replication_rng(seed: u64, replication: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}
