//! Seed derivation. Every random draw in an experiment comes from ChaCha8
//! keyed by the experiment seed, with the stream id selecting the purpose
//! (top 16 bits) and the index within that purpose (low 48 bits).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ExperimentRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    /// Fixed parity-check matrices.
    Matrix = 0,
    /// Per-trial source draws (and per-trial matrices, drawn first).
    Trial = 1,
    /// Restarts and annealing chains.
    Search = 2,
    /// Random test fixtures.
    Fixture = 3,
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ExperimentRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) | (index & ((1 << 48) - 1)));
    rng
}
