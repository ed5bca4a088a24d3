//! Seeded random streams.
//!
//! All randomness flows through [`ChaCha8Rng`], whose output is fixed across
//! platforms for a given 32-byte seed. Seeds for individual runs are derived
//! from a master seed and a tuple of identifiers with the SplitMix64
//! finalizer, so a run's stream does not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `master` with every part in order.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream_from_seed(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(master: u64, parts: &[u64]) -> Stream {
    stream_from_seed(derive_seed(master, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derivation_is_order_sensitive_and_stable() {
        assert_eq!(derive_seed(1, &[2, 3]), derive_seed(1, &[2, 3]));
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
        assert_ne!(derive_seed(1, &[2]), derive_seed(2, &[2]));
    }

    #[test]
    fn streams_reproduce() {
        let a: Vec<u32> = stream(7, &[1]).random_iter().take(4).collect();
        let b: Vec<u32> = stream(7, &[1]).random_iter().take(4).collect();
        assert_eq!(a, b);
    }
}
