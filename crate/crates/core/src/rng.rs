//! Seeded random number generation.
//!
//! Every random choice in this crate flows through a [`ChaCha8Rng`] created
//! here. A run is identified by a single `u64` seed; independent concerns
//! (the boosting random string, the learner's voter draws, dataset sampling)
//! take disjoint stream ids so that consuming numbers in one concern never
//! shifts another.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id for the learner's row/voter index draws.
pub const STREAM_LEARNER: u64 = 0;
/// Stream id for the boosting random string.
pub const STREAM_RANDOM_STRING: u64 = 1;
/// Stream id for synthetic dataset sampling.
pub const STREAM_DATASET: u64 = 2;
/// Stream id for bootstrap resampling.
pub const STREAM_BOOTSTRAP: u64 = 3;

/// A deterministic generator for `seed`, positioned on `stream`.
///
/// Identical `(seed, stream)` pairs yield identical output sequences.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
