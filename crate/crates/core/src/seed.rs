//! Seed derivation and the random number generator used by every chain.
//!
//! Child streams are derived as
//!
//! ```text
//! splitmix64(z) = let z = z + 0x9E3779B97F4A7C15;
//!                 let z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//!                 let z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//!                 z ^ (z >> 31)                      (wrapping u64 arithmetic)
//! child_seed(master, index) = splitmix64(master ^ splitmix64(index))
//! ```
//!
//! and each stream is a xoshiro256++ generator seeded with
//! `Xoshiro256PlusPlus::seed_from_u64(child)`.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type ChainRng = Xoshiro256PlusPlus;

#[inline]
pub fn splitmix64(z: u64) -> u64 {
    let z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    let z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th task spawned from `master`.
#[inline]
pub fn child_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

pub fn rng_from_seed(seed: u64) -> ChainRng {
    ChainRng::seed_from_u64(seed)
}

/// Uniform double in `[0, 1)` built from the top 53 bits of one draw.
#[inline]
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
pub fn fair_bit(rng: &mut impl RngCore) -> bool {
    rng.next_u64() >> 63 == 1
}
