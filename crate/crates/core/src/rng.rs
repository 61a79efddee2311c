//! Seeded random streams.
//!
//! All randomness flows through [`Rng64`], a ChaCha8 generator. Independent
//! workers derive their own stream from a base seed so results do not depend
//! on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng64 = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A generator on stream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
