//! Seeded random streams.
//!
//! Every replicate owns a private [`Xoshiro256PlusPlus`] stream. Replicate
//! `i` of an experiment with master seed `m` is seeded with `mix64(m, i)`:
//!
//! ```text
//! z = m + (i + 1) * 0x9E3779B97F4A7C15          (wrapping)
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9      (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB      (wrapping)
//! mix64 = z ^ (z >> 31)
//! ```
//!
//! which is the SplitMix64 output function applied to the Weyl sequence
//! position `i + 1` offset by the master seed. The resulting 64-bit value is
//! then expanded into the generator state by `SeedableRng::seed_from_u64`.

use rand::SeedableRng;
pub use rand_xoshiro::Xoshiro256PlusPlus as SimRng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Derive the seed of stream `index` from `master`.
#[inline]
pub fn mix64(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for a single seed.
pub fn stream(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Generator for replicate `index` of an experiment.
pub fn replicate_stream(master: u64, index: u64) -> SimRng {
    stream(mix64(master, index))
}
