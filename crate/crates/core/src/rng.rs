//! Seeded, splittable random streams.
//!
//! Every sampling entry point takes an explicit `u64` master seed. Independent
//! streams are carved out of a master seed with ChaCha8's 64-bit stream
//! counter: stream `k` of master `s` is `ChaCha8Rng::seed_from_u64(s)` with
//! `set_stream(k)`. Path `i` of an ensemble uses stream `i + PATH_STREAM_BASE`,
//! so a path's draws never depend on how many other paths are simulated or in
//! what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for all sampling.
pub type StreamRng = ChaCha8Rng;

/// First stream index used for simulated paths. Streams below it are kept for
/// stand-alone sampling and resampling.
pub const PATH_STREAM_BASE: u64 = 1 << 32;

/// Stream used by one-shot increment sampling.
pub const INCREMENT_STREAM: u64 = 0;

/// Stream used by bootstrap resampling.
pub const BOOTSTRAP_STREAM: u64 = 1;

/// Generator for stream `stream` of `master`.
pub fn stream(master: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Generator for path `index` of an ensemble seeded with `master`.
pub fn path(master: u64, index: u64) -> StreamRng {
    stream(master, PATH_STREAM_BASE + index)
}
