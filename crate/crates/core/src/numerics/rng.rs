use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::TimeGrid;

/// Address of an independent random stream: ChaCha8 keyed by the master
/// seed, with the stream index selecting the ChaCha stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }

    pub fn gaussian(&self) -> GaussianSource {
        GaussianSource { rng: self.rng() }
    }
}

/// Standard normal draws from one stream.
pub struct GaussianSource {
    rng: ChaCha8Rng,
}

impl GaussianSource {
    pub fn standard(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Standard normal conditioned on `|z| <= cut` (rejection).
    pub fn truncated(&mut self, cut: f64) -> f64 {
        loop {
            let z = self.standard();
            if z.abs() <= cut {
                return z;
            }
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// Brownian increments `N(0, Δt)` for `grid.steps()` steps, row-major
/// `[step][axis]`.
pub fn gaussian_increments(stream: RngStream, dim: usize, grid: &TimeGrid) -> Vec<f64> {
    let sd = grid.dt().sqrt();
    let mut src = stream.gaussian();
    (0..grid.steps() * dim).map(|_| sd * src.standard()).collect()
}
