//! Seeded RNG streams, one per pipeline stage.
//!
//! Each stage (teacher, ltl, ttfs, noise, data generation) draws from its own
//! stream derived from the master seed and the stage name, so changing how one
//! stage consumes randomness cannot perturb another stage's draws.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive the RNG stream for a named stage from the master seed.
pub fn stage_rng(master_seed: u64, stage: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(stage.as_bytes());
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}
