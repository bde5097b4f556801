//! Seeded randomness.
//!
//! A single 64-bit seed feeds a ChaCha8 generator; each consumer selects its
//! own stream with the FNV-1a hash of a label, so suites never share draws
//! and adding a suite does not perturb the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Generator for the substream named `label`.
pub fn substream(seed: u64, label: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(label));
    rng
}
