//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha8 keyed by
//! `ChaCha8Rng::seed_from_u64(seed)` with the 64-bit stream id selecting an
//! independent keystream. ChaCha is a counter-mode generator, so stream
//! `s` of seed `x` is reproducible by any implementation of ChaCha8 and does
//! not depend on how many other streams were consumed. Dataset generation
//! uses the shot index as the stream id.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ShotRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ShotRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
