//! Per-trial random streams.
//!
//! Each trial seeds its own generator from `(experiment seed, trial index)`,
//! so a trial's draws do not depend on how many other trials exist or on the
//! order in which a work pool schedules them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every sampler in the crate.
pub type TrialRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for trial `index` of an experiment seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> TrialRng {
    let key = mix64(mix64(seed) ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    // ChaCha streams are 64-bit addressable; keep trials on distinct ones too.
    rng.set_stream(index);
    rng
}
