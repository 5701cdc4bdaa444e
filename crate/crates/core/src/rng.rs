//! Seeded random streams.
//!
//! Every stochastic routine draws from ChaCha8 streams keyed by a master seed
//! and a stream index (a permutation number, a coalition mask, a sample block).
//! The key is mixed with SplitMix64 so neighbouring indices give unrelated
//! streams. Work items own their stream, which is what makes results
//! independent of thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and `index`.
pub fn mix(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Independent generator for sub-stream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(mix(seed, index))
}
