//! Deterministic seed derivation.
//!
//! Every random stream is keyed by `(base seed, replicate, purpose)`. The mixing
//! function is a bijection on `u64`, so distinct `(replicate, purpose)` pairs
//! under one base seed never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

/// Independent stream tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Graph,
    Covariate,
    Gmm,
    Sampler,
    Other(u8),
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Graph => 1,
            Purpose::Covariate => 2,
            Purpose::Gmm => 3,
            Purpose::Sampler => 4,
            Purpose::Other(t) => 0x80 | u64::from(t & 0x7f),
        }
    }
}

/// SplitMix64 finalizer, a bijection on `u64`.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for `replicate` and `purpose` under `base`.
///
/// Injective in `(replicate, purpose)` for `replicate < 2^56`.
pub fn derive_seed(base: u64, replicate: u64, purpose: Purpose) -> u64 {
    debug_assert!(replicate < (1 << 56));
    let key = (replicate << 8) | purpose.tag();
    mix64(mix64(base) ^ key)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
