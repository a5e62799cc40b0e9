//! Named random substreams derived from one 64-bit seed.
//!
//! A substream seed is `sha256(label || seed || indices...)`, so results do not
//! depend on thread scheduling or on how many other streams were drawn.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn substream_seed(label: &str, seed: u64, indices: &[u64]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update(seed.to_le_bytes());
    for i in indices {
        h.update(i.to_le_bytes());
    }
    h.finalize().into()
}

pub fn substream(label: &str, seed: u64, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(substream_seed(label, seed, indices))
}
