//! Seeded randomness.
//!
//! Every random component of an instance draws from its own [`Pcg64`] stream,
//! seeded with `seed ^ role` so that components reproduce independently of
//! each other and of the order in which they are generated.

use rand::SeedableRng;
pub use rand_pcg::Pcg64;

/// Role tags XOR-ed into an instance seed.
pub mod role {
    pub const LEFT_FACTOR: u64 = 0x4c45_4654_0000_0001;
    pub const RIGHT_FACTOR: u64 = 0x5249_4748_0000_0002;
    pub const SUPPORT: u64 = 0x5355_5050_0000_0003;
    pub const SIGNS: u64 = 0x5349_474e_0000_0004;
    pub const MEASUREMENT: u64 = 0x4d45_4153_0000_0005;
    pub const POWER_START: u64 = 0x504f_5745_0000_0006;
}

pub fn derive_seed(seed: u64, role: u64) -> u64 {
    seed ^ role
}

pub fn stream(seed: u64, role: u64) -> Pcg64 {
    Pcg64::seed_from_u64(derive_seed(seed, role))
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for trial `trial` of grid cell `cell`. Distinct `(cell, trial)` pairs
/// never share a seed for a given base.
pub fn trial_seed(base: u64, cell: u64, trial: u64) -> u64 {
    mix64(mix64(base ^ mix64(cell)).wrapping_add(trial))
}
