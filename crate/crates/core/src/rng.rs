//! Counter-based reproducible RNG streams.
//!
//! Every sampler takes a `(seed, stream)` pair so that independent paths and
//! samples can run in parallel and still reproduce bit-identically.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for stream `stream` under the master `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    let a = splitmix64(seed);
    let b = splitmix64(a ^ stream);
    let c = splitmix64(b ^ 0x6a09_e667_f3bc_c908);
    let d = splitmix64(c ^ stream.rotate_left(32));
    bytes[..8].copy_from_slice(&a.to_le_bytes());
    bytes[8..16].copy_from_slice(&b.to_le_bytes());
    bytes[16..24].copy_from_slice(&c.to_le_bytes());
    bytes[24..].copy_from_slice(&d.to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}
