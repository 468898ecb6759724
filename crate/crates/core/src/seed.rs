//! Seed expansion.
//!
//! A run has one 64-bit seed. Stage `i` draws from
//! `ChaCha8Rng::seed_from_u64(derive_seed(seed, i))` where
//! `derive_seed(s, i) = splitmix64(s + (i + 1) · 0x9E3779B97F4A7C15)`, so any
//! stage can be replayed on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stage: u64) -> u64 {
    splitmix64(seed.wrapping_add(stage.wrapping_add(1).wrapping_mul(GOLDEN)))
}

pub fn stage_rng(seed: u64, stage: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, stage))
}
