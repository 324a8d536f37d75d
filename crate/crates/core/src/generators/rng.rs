//! Seeded random stream shared by the market generators.
//!
//! ChaCha8 keyed from the 64-bit seed. Normals use Box-Muller over the
//! uniform stream, one draw per pair of uniforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) struct Stream(ChaCha8Rng);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform on [0, 1).
    pub fn unit(&mut self) -> f64 {
        self.0.gen::<f64>()
    }

    /// Uniform on [lo, hi].
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform on (0, hi].
    pub fn uniform_open_zero(&mut self, hi: f64) -> f64 {
        hi * (1.0 - self.unit())
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.0.gen_range(0..len)
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.unit(); // (0, 1]
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// `1 + N(mean, (mean * dev)^2)`, redrawn until strictly positive.
    pub fn valuation_near(&mut self, mean: f64, dev: f64) -> f64 {
        loop {
            let v = 1.0 + mean + mean * dev * self.standard_normal();
            if v > 0.0 {
                return v;
            }
        }
    }

    /// `k` distinct positions out of `0..len`.
    pub fn choose(&mut self, len: usize, k: usize) -> Vec<usize> {
        rand::seq::index::sample(&mut self.0, len, k).into_vec()
    }
}
