//! Labeled seed derivation from a 256-bit master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type Seed = [u8; 32];

/// `SHA256(master || label || counter)`.
pub fn derive(master: &Seed, label: &str, counter: u64) -> Seed {
    let mut h = Sha256::new();
    h.update(master);
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update(counter.to_le_bytes());
    h.finalize().into()
}

pub fn rng(master: &Seed, label: &str, counter: u64) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(derive(master, label, counter))
}

/// Master seed from a user-facing integer.
pub fn from_u64(seed: u64) -> Seed {
    derive(&[0u8; 32], "master", seed)
}

/// Parses a 64-character hex string or a decimal integer.
pub fn parse(s: &str) -> Option<Seed> {
    let s = s.trim();
    if s.len() == 64 {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).ok()?;
        return Some(out);
    }
    s.parse::<u64>().ok().map(from_u64)
}

pub fn to_hex(seed: &Seed) -> String {
    hex::encode(seed)
}
