//! Seeded random streams.
//!
//! Every consumer of randomness gets its own ChaCha stream keyed by a seed
//! and a role id, so two runs that share `(seed, role)` see the same draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream roles used by the experiment harness.
pub mod role {
    pub const ENVIRONMENT: u64 = 0;
    pub const PLANNER: u64 = 1;
    pub const FILTER: u64 = 2;
    pub const TUNER: u64 = 3;
}

pub fn stream(seed: u64, role: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(role);
    rng
}

/// Derive a stream for member `index` of a batch, keyed by `(seed, role, index)`.
pub fn substream(seed: u64, role: u64, index: u64) -> SimRng {
    // splitmix64 of the pair keeps nearby indices far apart in seed space
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    stream(z, role)
}
