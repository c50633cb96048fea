//! Seeded, splittable random streams.
//!
//! Every experiment names its seed; independent consumers draw from distinct
//! ChaCha streams of that seed instead of sharing a generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream identifiers used by the harness.
pub mod streams {
    pub const INFO_BITS: u64 = 0;
    pub const CHANNEL: u64 = 1;
    pub const BENCH: u64 = 2;
}

pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
