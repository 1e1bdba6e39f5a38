//! Named, reproducible RNG streams.
//!
//! A single master seed fans out into independent child streams keyed by a
//! string label. Changing one consumer's label (or adding a new consumer)
//! leaves every other stream's draws intact, which keeps sweep comparisons
//! paired and re-runs byte-identical.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives a deterministic child RNG from `(master, label)`.
pub fn stream(master: u64, label: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}
