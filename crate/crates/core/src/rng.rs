//! Seeded random streams.
//!
//! Every randomized operation derives independent ChaCha streams from
//! `(seed, stream index)`, so work can be split across threads without
//! changing results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Uniform direction on the unit sphere (normalized Gaussian).
pub fn unit_vec<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let mut v = gaussian_vec(rng, dim);
        let norm = crate::linalg::norm(&v);
        if norm > 1e-300 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit fingerprint of a vector's exact bit pattern.
pub fn fingerprint(seed: u64, values: &[f64]) -> u64 {
    values
        .iter()
        .fold(mix64(seed), |h, v| mix64(h ^ v.to_bits()))
}
