//! Keyed random streams.
//!
//! Every random draw in a run comes from a stream identified by
//! `(master seed, generation, member index, purpose)`. The key is hashed into a
//! ChaCha seed, so a member's draws do not depend on which worker runs it or on
//! how many workers exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    PsoUpdate = 2,
    DeDonor = 3,
    DeCrossover = 4,
    GaSelection = 5,
    GaReplacement = 6,
    GaCrossover = 7,
    GaMutation = 8,
}

// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_stream(master_seed: u64, generation: usize, member: usize, purpose: Purpose) -> Stream {
    let key = [
        master_seed,
        generation as u64,
        member as u64,
        purpose as u64,
    ];
    // Chain the key words so every output word depends on the whole key.
    let mut state = 0u64;
    let mut seed = [0u8; 32];
    for (chunk, word) in seed.chunks_exact_mut(8).zip(key) {
        state = mix(state ^ mix(word));
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
