//! Deterministic seed derivation.
//!
//! Every random draw in a benchmark plan is keyed off the master seed, a
//! text tag and an index, so identical plans replay bit-for-bit while
//! different problems/runs get independent streams.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Mixes (master, tag, index) into one 64-bit seed.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325 ^ master;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^= index;
    splitmix64(h)
}
