//! Deterministic RNG streams.
//!
//! All randomness in the crate flows from a single `u64` seed. Independent
//! streams (per chain, per replicate) are derived by mixing the seed with a
//! stream index through SplitMix64, so streams never depend on thread
//! scheduling.

use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the RNG for stream `stream` (chain index, replicate index, ...)
/// of the run seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Xoshiro256PlusPlus {
    let mut state = seed;
    let a = splitmix64(&mut state);
    let mut state = a ^ stream.wrapping_mul(0xD605_0B42_1E50_13C9).wrapping_add(stream);
    let b = splitmix64(&mut state);
    Xoshiro256PlusPlus::seed_from_u64(b)
}
