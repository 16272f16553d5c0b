//! Seeded random streams.
//!
//! Every random quantity comes from a ChaCha8 generator keyed by a 64-bit
//! seed, with a fixed stream number per purpose. ChaCha output is specified
//! bit-for-bit, so runs reproduce across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream numbers. A seed plus a stream identifies one independent sequence.
pub mod stream {
    /// Count-sketch bucket map `h`.
    pub const SKETCH_BUCKETS: u64 = 0;
    /// Count-sketch diagonal signs.
    pub const SKETCH_SIGNS: u64 = 1;
    /// Coefficient matrix entries.
    pub const MATRIX: u64 = 2;
    /// Sparsity pattern of sparse Gaussian matrices.
    pub const PATTERN: u64 = 3;
    /// Ground-truth solution vectors.
    pub const SOLUTION: u64 = 4;
    /// Phantom shapes for tomography.
    pub const PHANTOM: u64 = 5;
}

/// Generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed, e.g. one per repeat of an experiment.
///
/// SplitMix64 finalizer over `master ^ index·golden`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
