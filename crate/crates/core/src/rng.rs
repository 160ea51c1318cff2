//! Seeded randomness. Every random draw in a search goes through a
//! [`SearchRng`] so that identical seeds reproduce identical trees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SearchRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SearchRng {
    SearchRng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derives the seed of the `index`-th child stream of `base`.
///
/// Used for per-game, per-move and per-trial seeds so that work can be
/// sharded across workers without changing any result.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}
