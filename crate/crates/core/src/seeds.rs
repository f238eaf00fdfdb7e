//! Deterministic derivation of child seeds from a base seed.
//!
//! Every source of randomness in the toolkit (scenario perturbations,
//! training sessions, bridge sampling, selection) draws its seed through
//! [`derive`], so a single experiment seed reproduces the whole run.

/// SplitMix64 finalizer; good avalanche, stable across platforms.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `base`, a stream label, and an index.
pub fn derive(base: u64, stream: &str, index: u64) -> u64 {
    // FNV-1a over the label keeps distinct streams apart.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stream.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    splitmix64(base ^ h.rotate_left(17) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
