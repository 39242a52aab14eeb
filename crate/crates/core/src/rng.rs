//! Seeding. Every random quantity in the crate is a function of an explicit
//! `u64` seed; parallel work derives one child seed per unit of work, so the
//! results do not depend on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th unit of work under `root`.
pub fn child_seed(root: u64, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(index.wrapping_mul(0xD1B5_4A32_D192_ED03)))
}

pub fn child_rng(root: u64, index: u64) -> SeededRng {
    rng_from_seed(child_seed(root, index))
}
