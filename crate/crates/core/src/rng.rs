//! Seeded random streams.
//!
//! Every simulated unit (one review, one permutation batch) draws from its own
//! ChaCha8 stream, selected by `(seed, stream)`. Output is independent of
//! thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
