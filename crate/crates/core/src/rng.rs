//! Seeded random streams.
//!
//! Every consumer gets its own ChaCha8 stream: the seed selects the key and
//! the [`Stream`] purpose selects the ChaCha stream id, so the noise stream of
//! realization 3 never overlaps the swarm stream of PSO run 3.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Swarm = 1,
    Noise = 2,
    Bootstrap = 3,
}

pub fn stream(purpose: Stream, seed: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}
