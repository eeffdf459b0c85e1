//! Seed streams.
//!
//! Every Monte Carlo trial draws from its own ChaCha stream keyed by
//! `(seed, stream index)`, so results never depend on how trials are split
//! across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// RNG for stream `index` of `seed`.
pub fn stream(seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives an independent child seed, used when one experiment needs several
/// unrelated families of streams (e.g. link fading vs. measurement noise).
pub fn child_seed(seed: u64, label: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
