//! Counter-style derivation of independent random streams from one seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A generator keyed by `(master, a, b)` within a domain. Distinct keys give
/// independent streams; equal keys replay the same stream.
pub fn keyed_rng(domain: u64, master: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master.to_le_bytes());
    key[8..16].copy_from_slice(&a.to_le_bytes());
    key[16..24].copy_from_slice(&b.to_le_bytes());
    key[24..].copy_from_slice(&domain.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

pub fn derive_seed(master: u64, tag: u64) -> u64 {
    keyed_rng(0, master, tag, 0).next_u64()
}
