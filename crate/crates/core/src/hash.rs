//! Stable 64-bit hashing used wherever results must not depend on platform
//! or process (token bucketing, per-item RNG seed derivation).

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over a byte slice.
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Derive an independent RNG seed from a base seed and a string label.
///
/// Mixing the label into the hash keeps per-item streams independent of the
/// order in which items are visited.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in base.to_le_bytes().iter() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    // NUL separator so (1, "ab") and (1, "a") followed by junk stay distinct.
    h ^= 0;
    h = h.wrapping_mul(FNV_PRIME);
    for &b in label.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Variant of [`derive_seed`] with an extra numeric component, for seeds
/// that depend on both an item label and a repetition index.
pub fn derive_seed_indexed(base: u64, index: u64, label: &str) -> u64 {
    derive_seed(derive_seed(base, "rep").wrapping_add(index), label)
}
