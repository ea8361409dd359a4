//! Seeding rules shared by every stochastic routine.
//!
//! All randomness flows from ChaCha8 streams. Independent replications derive
//! their seeds with [`replication_seed`], so the aggregate of a run never
//! depends on the order (or the thread) in which replications execute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of replication `index` under base seed `base`:
/// `splitmix64(base ^ splitmix64(index))`.
pub fn replication_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

/// Seed for a named sub-stream (e.g. exogenous demand vs. tie-breaking).
pub fn substream_seed(base: u64, label: &str) -> u64 {
    label
        .bytes()
        .fold(splitmix64(base), |acc, b| splitmix64(acc ^ u64::from(b)))
}
