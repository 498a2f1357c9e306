//! Deterministic, counter-based random streams.
//!
//! Every unit of simulated work (one block, one stream chunk, one batch of
//! DE trials) draws from its own ChaCha stream keyed by the master seed and
//! a stream identifier, so results do not depend on how work is scheduled
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags keep streams of different subsystems disjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Simulation = 1,
    DensityEvolution = 2,
    Test = 3,
}

/// Returns the stream for `(purpose, point, index)` under `master_seed`.
///
/// `point` is typically an SNR-grid index and `index` a trial counter.
pub fn stream(master_seed: u64, purpose: Purpose, point: u32, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed ^ ((purpose as u64) << 56));
    // 24 bits of point, 40 bits of trial index
    let id = ((point as u64 & 0xFF_FFFF) << 40) | (index & 0xFF_FFFF_FFFF);
    rng.set_stream(id);
    rng
}
