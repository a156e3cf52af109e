//! Seed derivation for replica streams.
//!
//! `derive_seed(root, task, replica)` is
//!
//! ```text
//! mix(mix(mix(root) ^ task) ^ replica)
//! ```
//!
//! where `mix` is the SplitMix64 output function applied to `z + 0x9E3779B97F4A7C15`
//! (wrapping arithmetic on u64):
//!
//! ```text
//! z = z + 0x9E3779B97F4A7C15
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z ^ (z >> 31)
//! ```
//!
//! Each stage is a bijection of u64, so for fixed `(root, task)` distinct
//! replica indices can never collide. Streams are Xoshiro256++ seeded through
//! `SeedableRng::seed_from_u64`.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type SimRng = Xoshiro256PlusPlus;

/// Task identifiers used as the middle argument of [`derive_seed`].
pub mod task {
    pub const SIMULATE: u64 = 1;
    pub const MARTINGALE: u64 = 2;
    pub const SPINE_FAMILY: u64 = 3;
    pub const SPINE_MARGINAL: u64 = 4;
    pub const WALK_REFERENCE: u64 = 5;
    pub const MANY_TO_ONE_TREE: u64 = 6;
    pub const MANY_TO_ONE_WALK: u64 = 7;
    pub const CSTAR: u64 = 8;
    pub const WALK: u64 = 9;
    pub const RENEWAL: u64 = 10;
    pub const LOCAL_PROB: u64 = 11;
    pub const BIG_JUMP: u64 = 12;
    pub const THERMO: u64 = 13;
    pub const GIBBS: u64 = 14;
    pub const FIXED_POINT: u64 = 15;
    pub const BOOTSTRAP: u64 = 16;
    pub const HORIZON: u64 = 17;
}

#[inline]
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(root_seed: u64, task_id: u64, replica: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(root_seed) ^ task_id) ^ replica)
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn adjacent_replicas_never_collide() {
        for root in [0u64, 1, 42, u64::MAX] {
            for r in 0..250_000u64 {
                assert_ne!(derive_seed(root, 3, r), derive_seed(root, 3, r + 1));
            }
        }
    }

    #[test]
    fn frozen_values() {
        // Byte-exact contract for alternate implementations.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        let a = derive_seed(7, task::SIMULATE, 0);
        assert_eq!(a, derive_seed(7, task::SIMULATE, 0));
        assert_ne!(a, derive_seed(8, task::SIMULATE, 0));
    }

    #[test]
    fn root_change_moves_every_seed() {
        for r in 0..10_000 {
            assert_ne!(derive_seed(1, 9, r), derive_seed(2, 9, r));
        }
    }

    #[test]
    fn rng_is_deterministic() {
        let mut a = rng_from_seed(99);
        let mut b = rng_from_seed(99);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}
