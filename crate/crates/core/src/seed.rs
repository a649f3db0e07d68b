//! Deterministic child random streams.
//!
//! Every stochastic quantity is drawn from a stream derived from
//! `(master seed, purpose label, index path)`. Two calls with the same
//! triple see the same numbers no matter which thread runs them or in which
//! order trials are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Random stream type handed to every sampling routine.
pub type Stream = ChaCha8Rng;

/// Root of the stream tree for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MasterSeed(pub u64);

impl MasterSeed {
    pub fn new(seed: u64) -> Self {
        MasterSeed(seed)
    }

    /// Stream for `label` at the given index path.
    pub fn stream(&self, label: &str, path: &[u64]) -> Stream {
        let mut h = Sha256::new();
        h.update(self.0.to_le_bytes());
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        for ix in path {
            h.update(ix.to_le_bytes());
        }
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(key)
    }

    /// Derive a new master seed, for nesting experiments under one run seed.
    pub fn child(&self, label: &str, path: &[u64]) -> MasterSeed {
        use rand::RngCore;
        MasterSeed(self.stream(label, path).next_u64())
    }
}
