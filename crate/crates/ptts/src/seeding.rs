//! Deterministic sub-streams derived from one u64 seed. Each consumer
//! draws from its own ChaCha stream so the draws of one stage never shift
//! another stage's sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub(crate) const STREAM_SCENARIO: u64 = 0;
pub(crate) const STREAM_LEAK: u64 = 1;
pub(crate) const STREAM_REPLAY: u64 = 2;
pub(crate) const STREAM_TARGET: u64 = 3;
pub(crate) const STREAM_PROBES: u64 = 4;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
