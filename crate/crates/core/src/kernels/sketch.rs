use crate::error::{CurError, Result};
use crate::matrix::DenseMatrix;
use crate::rng::{seeded, standard_normal_matrix};

/// Gaussian embedding `Ω` of shape `sketch_rows x m`, entries N(0, 1/sketch_rows).
pub fn gaussian_embedding(sketch_rows: usize, m: usize, seed: u64) -> DenseMatrix {
    let omega = standard_normal_matrix(sketch_rows, m, &mut seeded(seed));
    omega.scaled(1.0 / (sketch_rows as f64).sqrt())
}

/// Row sketch `ΩA`.
pub fn gaussian_sketch(a: &DenseMatrix, sketch_rows: usize, seed: u64) -> Result<DenseMatrix> {
    if sketch_rows == 0 {
        return Err(CurError::param("sketch_rows", "must be at least 1"));
    }
    let omega = gaussian_embedding(sketch_rows, a.rows(), seed);
    Ok(omega.mul_unchecked(a))
}
