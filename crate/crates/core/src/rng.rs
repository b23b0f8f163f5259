//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by
//! `(seed, stream)`, so work split across threads stays reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::C64;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian vector (independent real and imaginary parts).
pub fn complex_normal(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect()
}

/// Uniform point in the closed complex disk of the given radius.
pub fn disk_point(rng: &mut impl Rng, radius: f64) -> C64 {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = std::f64::consts::TAU * rng.random::<f64>();
    C64::from_polar(r, theta)
}
