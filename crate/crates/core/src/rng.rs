//! Counter-based uniform draws.
//!
//! Every draw is a pure function of `(seed, stream, counter)`: the ChaCha8
//! keystream for `seed` is positioned at `stream` and word offset `2 * counter`
//! and one `u64` is read. Nothing is carried between draws, so the value for a
//! given key never depends on what else has been sampled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct CounterRng {
    key: <ChaCha8Rng as SeedableRng>::Seed,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        let mut key = <ChaCha8Rng as SeedableRng>::Seed::default();
        ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut key);
        Self { key }
    }

    pub fn u64(&self, stream: u64, counter: u64) -> u64 {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(stream);
        rng.set_word_pos(u128::from(counter) * 2);
        rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&self, stream: u64, counter: u64) -> f64 {
        (self.u64(stream, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for replication `index`: the base seed XOR a hash of the index.
/// Adding replications never changes the seeds of existing ones.
pub fn replication_seed(base: u64, index: u64) -> u64 {
    base ^ mix64(index)
}
