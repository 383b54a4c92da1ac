//! Seeded random streams.
//!
//! Every random quantity in the crate comes from a `ChaCha8Rng` seeded with
//! `seed_from_u64(seed)`. Normal variates use `rand_distr::StandardNormal`
//! (ziggurat). Both are pure integer/float algorithms with no platform
//! dependence, so a seed names the same matrix everywhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::DenseMatrix;

pub type CurRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> CurRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fills a `rows x cols` matrix with i.i.d. N(0, 1) entries in row-major order.
pub fn standard_normal_matrix(rows: usize, cols: usize, rng: &mut CurRng) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    DenseMatrix::from_vec_unchecked(rows, cols, data)
}

pub fn standard_normal(rng: &mut CurRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform on `[0, 1)`.
pub fn unit_uniform(rng: &mut CurRng) -> f64 {
    rng.random::<f64>()
}

pub fn below(rng: &mut CurRng, bound: usize) -> usize {
    rng.random_range(0..bound)
}
