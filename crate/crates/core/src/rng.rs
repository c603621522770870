//! Labelled, replicate-indexed random streams.
//!
//! Every stream is a ChaCha8 generator keyed by
//! `SHA-256(master seed ‖ label ‖ replicate index)`, so adding a new label
//! never perturbs the streams of existing ones and results do not depend on
//! how replicates are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

pub fn stream(master_seed: u64, label: &str, index: u64) -> StreamRng {
    ChaCha8Rng::from_seed(derive_seed(master_seed, label, index))
}

pub fn derive_seed(master_seed: u64, label: &str, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    h.finalize().into()
}

/// A 64-bit sub-seed for a labelled child experiment.
pub fn sub_seed(master_seed: u64, label: &str) -> u64 {
    let s = derive_seed(master_seed, label, u64::MAX);
    u64::from_le_bytes(s[..8].try_into().expect("8 bytes"))
}
