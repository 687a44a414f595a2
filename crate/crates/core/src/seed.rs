//! Counter-based seed splitting.
//!
//! Every random quantity is drawn from a ChaCha generator whose seed is
//! `derive(master, stream, index)`: a SplitMix64 mix of the master seed, a
//! stream tag naming the kind of draw, and a counter (channel, ear, restart,
//! permutation batch ...). Sub-seeds depend only on these three integers, so
//! work split across threads reproduces the sequential result exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags. Distinct constants keep unrelated draws decorrelated.
pub mod stream {
    pub const CHANNEL: u64 = 0x01;
    pub const CALIBRATION: u64 = 0x02;
    pub const COHORT_PAIRING: u64 = 0x03;
    pub const COHORT_EAR: u64 = 0x04;
    pub const SESSION: u64 = 0x05;
    pub const SUBJECT: u64 = 0x06;
    pub const SPED: u64 = 0x07;
    pub const KMEANS_RESTART: u64 = 0x08;
    pub const PERMUTATION: u64 = 0x09;
    pub const PIPELINE_K: u64 = 0x0A;
    pub const REPLICATE: u64 = 0x0B;
    pub const STUDY: u64 = 0x0C;
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for draw `index` of `stream` under `master`.
pub fn derive(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream)) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Stable 64-bit FNV-1a hash for turning labels into stream indices.
pub fn hash_label(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_for(master: u64, stream: u64, index: u64) -> Rng {
    rng(derive(master, stream, index))
}
