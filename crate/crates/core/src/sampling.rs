//! Counter-based random substreams and complex Gaussian draws.
//!
//! Every Monte Carlo trial gets its own ChaCha stream selected by
//! `(seed, index)`, so what a trial sees does not depend on which worker
//! runs it or in what order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type TrialRng = ChaCha8Rng;

/// Independent generator for trial `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Circularly-symmetric complex Gaussian with total variance `variance`
/// (real and imaginary parts each `variance / 2`).
#[inline]
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

pub fn fill_complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64, out: &mut [Complex64]) {
    for z in out.iter_mut() {
        *z = complex_normal(rng, variance);
    }
}
