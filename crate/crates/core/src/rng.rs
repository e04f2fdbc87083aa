//! Seeded random streams.
//!
//! Every episode owns one ChaCha stream (stream id 0) for environment
//! randomness. Scripted agents draw from their own substreams of the same
//! seed, keyed by agent id, so adding or removing a heuristic agent never
//! shifts the environment's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Environment stream for `seed`.
pub fn episode_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Per-agent substream derived from the episode seed and the agent id.
pub fn agent_rng(seed: u64, agent_id: u32) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(1 + agent_id as u64);
    rng
}

/// Independent stream for a named purpose (e.g. policy sampling in training).
pub fn purpose_rng(seed: u64, purpose: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng
}

/// Stream ids for [`purpose_rng`]. They sit far above the per-agent
/// streams (`1 + id`).
pub mod streams {
    pub const POLICY_INIT: u64 = 1 << 62;
    pub const POLICY_SAMPLING: u64 = (1 << 62) + 1;
    pub const MINIBATCH_SHUFFLE: u64 = (1 << 62) + 2;
}

/// Seed of the `index`-th episode of a run seeded with `base` (splitmix64).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
