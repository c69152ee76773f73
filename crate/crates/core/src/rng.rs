//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a
//! 64-bit seed and a string label (typically a variable name). The key is
//! mixed as `splitmix64(seed ^ splitmix64(fnv1a64(label)))` and expanded with
//! `ChaCha8Rng::seed_from_u64`. Streams for different labels are independent,
//! so adding a variable to a model does not perturb the draws of the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// The stream for `(seed, label)`.
pub fn substream(seed: u64, label: &str) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(fnv1a64(label.as_bytes())));
    ChaCha8Rng::seed_from_u64(key)
}

/// A draw from the flat Dirichlet over `k` categories.
pub fn flat_dirichlet(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = row.iter().sum();
    for p in &mut row {
        *p /= total;
    }
    row
}

/// Mixes `row` with the uniform distribution so that every entry is at
/// least `floor`: `p_i = floor + (1 - k * floor) * row_i`.
pub fn apply_floor(row: &mut [f64], floor: f64) {
    let k = row.len() as f64;
    assert!(floor * k <= 1.0, "floor too large for {k} categories");
    let scale = 1.0 - k * floor;
    for p in row {
        *p = floor + scale * *p;
    }
}
