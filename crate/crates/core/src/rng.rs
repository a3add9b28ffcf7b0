//! Deterministic random streams.
//!
//! Every consumer draws from its own ChaCha stream, identified by a tag and an
//! index, so changing the sample count never perturbs generated weights and
//! block-parallel sampling is independent of the thread schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Router = 1,
    Experts = 2,
    Samples = 3,
    Seeds = 4,
    Sphere = 5,
    Misc = 6,
}

/// RNG for `(seed, stream, index)`.
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 48) ^ index);
    rng
}

pub fn gaussian<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    let v: f64 = rng.sample(StandardNormal);
    T::lit(v)
}

pub fn gaussian_vec<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<T> {
    (0..n).map(|_| gaussian(rng)).collect()
}

pub fn gaussian_matrix<T: Scalar, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<T>> {
    (0..rows).map(|_| gaussian_vec(rng, cols)).collect()
}

/// Uniform point on the unit sphere S^{d-1}.
pub fn unit_sphere<T: Scalar, R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<T> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| T::lit(x / n)).collect();
        }
    }
}

/// Uniform in the open interval (lo, hi).
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return lo + (hi - lo) * u;
        }
    }
}
