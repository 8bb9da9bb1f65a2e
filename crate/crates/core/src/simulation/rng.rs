//! Reproducible random streams.
//!
//! Every draw is made from a ChaCha8 stream keyed by the master seed and the
//! scenario fingerprint, and selected by (replication, role). Replications
//! can therefore run in any order, on any number of threads, and produce the
//! same numbers; changing how many draws one role consumes (e.g. rejection
//! sampling) never shifts another role's stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum DrawRole {
    StandardErrors = 0,
    Effects = 1,
    Observations = 2,
    ArmLogOdds = 3,
    Events = 4,
}

const ROLES: u64 = 8;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a; stable across platforms and toolchains.
pub fn fingerprint(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn stream_rng(seed: u64, fingerprint: u64, rep: u64, role: DrawRole) -> ChaCha8Rng {
    let words = [
        splitmix64(seed),
        splitmix64(fingerprint),
        splitmix64(seed ^ splitmix64(fingerprint)),
        splitmix64(seed.rotate_left(17) ^ fingerprint.rotate_left(43)),
    ];
    let mut key = [0u8; 32];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(rep * ROLES + role as u64);
    rng
}
