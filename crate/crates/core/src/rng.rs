//! Deterministic seed hierarchy.
//!
//! Every random draw in the crate comes from a ChaCha8 generator whose seed
//! is derived by hashing a path of indices below a single root seed:
//!
//! ```text
//! root seed -> stream substream (e.g. graph seed s) -> snapshot substream (t) -> probe substream (r)
//! ```
//!
//! Derivation is a pure function of the path, so results do not depend on
//! thread scheduling or on the order in which substreams are visited.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of child `index` below `parent`.
#[inline]
pub fn substream(parent: u64, index: u64) -> u64 {
    mix64(mix64(parent) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Seed reached by following `path` from `root`.
pub fn derive(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(root, |seed, &i| substream(seed, i))
}

/// Generator for a derived seed.
pub fn generator(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Domain tags keep unrelated consumers of one root seed apart.
pub mod domain {
    pub const GRAPHS: u64 = 0x6772_6170_6873;
    pub const PROBES: u64 = 0x7072_6f62_6573;
}
