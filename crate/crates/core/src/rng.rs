//! Counter-keyed random streams.
//!
//! Every random quantity in the crate is drawn from a stream identified by
//! the triple `(seed, sample_index, tag)`. The key derivation is:
//!
//! 1. `a = splitmix64(seed) ^ sample_index`
//! 2. `b = splitmix64(a) ^ (tag * 0x9E3779B97F4A7C15)`
//! 3. the four 64-bit words of the ChaCha8 key are the next four outputs of a
//!    SplitMix64 generator started at state `b`, written little-endian.
//!
//! ChaCha8 (from `rand_chacha`) is a counter-mode cipher, so a stream is a
//! pure function of its key and is identical on every platform. Distinct
//! samples and distinct tags never share a key unless SplitMix64 collides.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. Values are part of the reproducibility contract; never renumber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamTag {
    PlaneWaves = 1,
    SphereCoefficients = 2,
    Bootstrap = 3,
    Synthetic = 4,
    TreeSampling = 5,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// One step of SplitMix64, returning the output and advancing `state`.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The 32-byte ChaCha key for a stream.
pub fn stream_key(seed: u64, sample_index: u64, tag: StreamTag) -> [u8; 32] {
    let mut s = seed;
    let a = splitmix64(&mut s) ^ sample_index;
    let mut s = a;
    let b = splitmix64(&mut s) ^ (tag as u64).wrapping_mul(GOLDEN_GAMMA);
    let mut s = b;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    key
}

pub fn stream(seed: u64, sample_index: u64, tag: StreamTag) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(stream_key(seed, sample_index, tag))
}
