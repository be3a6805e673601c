//! Deterministic RNG streams.
//!
//! Every random quantity is drawn from a ChaCha stream keyed by
//! `(seed, purpose, index)`, so independent consumers never perturb each
//! other's sequences.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose tags for stream splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Constraint = 1,
    Utility = 2,
    Baseline = 3,
    Scenario = 4,
    Replica = 5,
    Sampling = 6,
    UserOrder = 7,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit key for `(seed, purpose, index)`.
pub fn derive_seed(seed: u64, purpose: Purpose, index: u64) -> u64 {
    splitmix(splitmix(seed ^ splitmix(purpose as u64)) ^ index)
}

/// RNG for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, purpose, index))
}

/// RNG seeded directly from an integer.
pub fn seeded(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}
