//! Seeded, splittable random streams.
//!
//! Every Monte Carlo replication draws from its own ChaCha20 stream, keyed by
//! the user seed and the replication index. ChaCha20 is counter based, so the
//! stream for replication `r` does not depend on how many values other
//! replications consumed, or on which thread ran them.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derive an independent child seed from `rng`.
pub fn child_seed(rng: &mut StreamRng) -> u64 {
    rng.next_u64()
}

/// Mix `(seed, salt)` into a new seed, so that unrelated experiment stages
/// sharing one user seed do not reuse streams.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
