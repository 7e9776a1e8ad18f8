//! Seed derivation for independent runs.
//!
//! Every random stream is a `ChaCha8Rng` seeded through `seed_from_u64`.
//! Run `i` of an ensemble with master seed `s` uses `stream_seed(s, i)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Recorded in output metadata.
pub const GENERATOR_NAME: &str = "rand_chacha::ChaCha8Rng (seed_from_u64)";

/// Describes how run seeds are derived, for metadata.
pub const STREAM_RULE: &str = "run_seed = splitmix64(splitmix64(master) ^ run_index)";

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_seed(master: u64, run_index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ run_index)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
