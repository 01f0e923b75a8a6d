//! Counter-based randomness.
//!
//! Every random decision in a sampling run is a pure function of
//! `(run seed, domain tag, shot index, slot index, lane)`. Shots can be
//! generated in any order, in parallel, and two runs that share a seed see
//! identical per-slot uniforms even when their noise parameters differ —
//! which is what makes common-random-number finite differences work in the
//! error-budget sweeps.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain separation tags for the independent random streams of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Per-op-slot error occurrence and Pauli choice.
    OpNoise = 1,
    /// Per-batch reference trajectory (tableau measurement coins).
    Reference = 2,
    /// Per-batch random initialization strings.
    InitString = 3,
    /// Burst start decisions, one per shot.
    Burst = 4,
    /// Correlated-channel triggers.
    Correlated = 5,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One 64-bit word from the counter stream.
#[inline]
pub fn mix(seed: u64, domain: Domain, shot: u64, slot: u64, lane: u64) -> u64 {
    let a = splitmix64(seed ^ splitmix64((domain as u64) << 56 | lane));
    let b = splitmix64(a ^ splitmix64(shot));
    splitmix64(b ^ splitmix64(slot))
}

/// Uniform f64 in [0, 1) from the counter stream.
#[inline]
pub fn uniform(seed: u64, domain: Domain, shot: u64, slot: u64, lane: u64) -> f64 {
    // 53 high bits -> [0,1)
    (mix(seed, domain, shot, slot, lane) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A seeded stream generator for the non-hot-path decisions (reference
/// coins, init strings). ChaCha8 keyed by the mixed counter word.
pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, domain, index, 0, 0))
}
