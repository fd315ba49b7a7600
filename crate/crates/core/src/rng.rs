//! Seeded, stream-splittable randomness.
//!
//! Every random task draws from its own ChaCha8 stream keyed by
//! `(seed, domain, index)`, so results do not depend on how tasks are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a hash of a domain label, folded through [`mix64`].
pub fn domain_hash(domain: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in domain.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    mix64(h)
}

/// Derived 64-bit key for `(seed, domain, index)`.
pub fn derive_key(seed: u64, domain: &str, index: u64) -> u64 {
    mix64(seed ^ domain_hash(domain) ^ mix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Independent generator for task `index` within `domain`.
pub fn stream(seed: u64, domain: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain_hash(domain));
    rng.set_stream(index);
    rng
}
