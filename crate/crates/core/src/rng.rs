//! Seedable, reproducible random-number streams.
//!
//! All stochastic operations in this crate take an explicit `u64` seed.
//! Ensemble simulations derive one independent stream per path from
//! `(seed, path_index)` via a SplitMix64 key schedule feeding ChaCha8, so
//! results are identical regardless of execution order or parallelism.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; a full-period bijective mixer on `u64`.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The RNG type used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Independent stream for path `index` under master `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(splitmix64(seed).wrapping_add(splitmix64(index ^ 0x5851_F42D_4C95_7F2D)))
}

/// Convenience stream for single-sequence sampling.
pub fn single(seed: u64) -> Stream {
    stream(seed, 0)
}
