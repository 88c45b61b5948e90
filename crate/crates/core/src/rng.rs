//! Reproducible random streams.
//!
//! Every draw comes from a ChaCha8 generator. A stream is identified by a
//! 64-bit seed; Monte Carlo repetitions derive their seeds from a master seed
//! and the repetition index through SplitMix64 finalization, so the stream of
//! repetition `i` is the same whatever order or thread computes it.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th substream of `master_seed`.
pub fn stream_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ splitmix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

/// A seeded stream of uniforms on the open interval (0, 1).
pub struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn next_open01(&mut self) -> f64 {
        self.rng.sample(Open01)
    }
}
