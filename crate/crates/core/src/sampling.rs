//! Seeded generators for test functions and weights.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::grid::{Grid, GridFunction};
use crate::weights::Weight;

/// Deterministic source of random grid functions; the seed fixes every draw.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Cellwise `N(0, 1)`.
    pub fn signed(&mut self, grid: Grid) -> GridFunction {
        let values = (0..grid.cell_count()).map(|_| StandardNormal.sample(&mut self.rng)).collect();
        GridFunction::from_vec_unchecked(grid, values)
    }

    /// Cellwise `|N(0, 1)|`.
    pub fn nonnegative(&mut self, grid: Grid) -> GridFunction {
        self.signed(grid).abs()
    }

    /// Cellwise `exp(N(0, sigma))`.
    pub fn lognormal(&mut self, grid: Grid, sigma: f64) -> Weight {
        let normal = Normal::new(0.0, sigma).expect("sigma is finite and nonnegative");
        let values = (0..grid.cell_count()).map(|_| normal.sample(&mut self.rng).exp()).collect();
        Weight::new(GridFunction::from_vec_unchecked(grid, values)).expect("exp is positive")
    }

    /// Nonnegative function supported on a random subset of cells (each kept
    /// with probability `density`), values `|N(0,1)|`.
    pub fn sparse_support(&mut self, grid: Grid, density: f64) -> GridFunction {
        let values = (0..grid.cell_count())
            .map(|_| {
                let keep = self.rng.random_bool(density);
                let v: f64 = StandardNormal.sample(&mut self.rng);
                if keep {
                    v.abs()
                } else {
                    0.0
                }
            })
            .collect();
        GridFunction::from_vec_unchecked(grid, values)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }
}
