//! Deterministic seed derivation.
//!
//! Every random stream in the toolkit is a [`ChaCha8Rng`] keyed by a 64-bit
//! seed derived from the master seed through a stateless mixing chain, so
//! results are reproducible regardless of execution order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a stream index.
///
/// The chain `derive_seed(derive_seed(master, a), b)` is the canonical way to
/// namespace nested streams (corpus -> K -> run).
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    splitmix64(parent.rotate_left(17) ^ splitmix64(stream))
}

/// Portable RNG used everywhere: ChaCha with 8 rounds, seeded via the
/// documented `seed_from_u64` expansion.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fixed stream tags so sibling streams never collide.
pub mod stream {
    pub const PHI: u64 = 0x01;
    pub const THETA: u64 = 0x02;
    pub const TOKENS: u64 = 0x03;
    pub const REINJECT: u64 = 0x04;
    pub const DOC_SHUFFLE: u64 = 0x05;
    pub const RUN_SHUFFLE: u64 = 0x06;
    pub const FIT: u64 = 0x07;
}
