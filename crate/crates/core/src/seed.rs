//! Seed derivation.
//!
//! All randomness in the toolkit flows from a single root seed. Independent
//! streams (one per record, per sweep cell, per bootstrap run, ...) are
//! derived with [`derive_seed`], which applies a SplitMix64 finalizer to
//! `root + index * GOLDEN_GAMMA`. The rule is stable across releases so that
//! every artifact is reproducible from its config.

/// Weyl-sequence increment used by SplitMix64.
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Derives the `index`-th child seed of `root`.
///
/// Distinct indices give statistically independent streams; the map is a
/// bijection per index so collisions across indices are no more likely than
/// for random 64-bit values.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root
        .wrapping_add(GOLDEN_GAMMA)
        .wrapping_add(index.wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
