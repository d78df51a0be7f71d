//! Deterministic seeded random streams.
//!
//! All randomness in this crate flows through counter-based substreams keyed
//! by (master seed, tag, index). Deriving a fresh generator per particle /
//! per (agent, step) keeps results identical whether the work runs
//! sequentially or in parallel, and means inserting an agent never perturbs
//! the draws of any other.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 step; a strong enough mixer for seed derivation.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combine a seed with a tag and an index into a single 64-bit key.
#[inline]
pub fn derive(seed: u64, tag: u64, index: u64) -> u64 {
    mix(mix(mix(seed) ^ tag) ^ index)
}

/// A fresh generator for the substream identified by (seed, tag, index).
pub fn substream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let key = derive(seed, tag, index);
    let mut bytes = [0u8; 32];
    let mut z = key;
    for chunk in bytes.chunks_exact_mut(8) {
        z = mix(z);
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

/// Stable 64-bit hash of an identifier (FNV-1a). Used to key per-agent
/// substreams by name rather than by insertion order.
pub fn id_hash(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
