//! Deterministic random streams.
//!
//! Every stochastic decision draws from a ChaCha8 stream keyed by a tuple of
//! integers (master seed, purpose, label, generation, ...). Streams never
//! depend on evaluation order, so serial and parallel runs agree bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose tags mixed into derived seeds.
pub mod purpose {
    pub const INIT: u64 = 1;
    pub const TOURNAMENT: u64 = 2;
    pub const JITTER: u64 = 3;
    pub const PERTURB: u64 = 4;
    pub const SAMPLING: u64 = 5;
    pub const NOISE: u64 = 6;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of keys into one 64-bit seed.
pub fn derive_seed(keys: &[u64]) -> u64 {
    keys.iter().fold(0x6A09_E667_F3BC_C908, |acc, k| {
        splitmix64(acc ^ splitmix64(*k))
    })
}

pub fn stream(keys: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(keys))
}
