//! Seed derivation and random streams.
//!
//! Every stochastic component draws from a ChaCha8 stream whose 32-byte key
//! is four consecutive SplitMix64 outputs started from a derived 64-bit seed.
//! Child seeds are derived from a parent seed and a path of integers
//! (`derive_seed(s, &[a, b])`), folding each element with
//! `state = splitmix64(state ^ splitmix64(elem + GOLDEN))`. Named sub-seeds
//! use the FNV-1a hash of the name as the path element.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One SplitMix64 output for the given state.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(seed), |state, &elem| {
        splitmix64(state ^ splitmix64(elem.wrapping_add(GOLDEN)))
    })
}

/// 64-bit FNV-1a of a name, used to turn named sub-seeds into path elements.
pub fn name_hash(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

pub fn named_seed(seed: u64, name: &str) -> u64 {
    derive_seed(seed, &[name_hash(name)])
}

pub fn stream(seed: u64) -> Stream {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&splitmix64(state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

pub fn derived_stream(seed: u64, path: &[u64]) -> Stream {
    stream(derive_seed(seed, path))
}
