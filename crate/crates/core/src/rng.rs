//! Deterministic seed derivation for independent random streams.
//!
//! Every random draw in a sweep comes from a ChaCha8 stream whose seed is a
//! SplitMix64 hash of `(base_seed, coordinates..., tag)`. Streams depend only
//! on their own coordinates, so trials can run in any order or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::tensor::C64;

pub type StreamRng = ChaCha8Rng;

/// Stream labels kept apart so channel and noise draws never share a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    Channel = 0x6368_616e,
    Noise = 0x6e6f_6973,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, coords: &[u64], tag: StreamTag) -> u64 {
    let mut s = splitmix64(base);
    for &c in coords {
        s = splitmix64(s ^ splitmix64(c));
    }
    splitmix64(s ^ tag as u64)
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One draw from CN(0, variance).
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * scale, im * scale)
}
