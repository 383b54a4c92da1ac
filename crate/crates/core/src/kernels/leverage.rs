use crate::error::{CurError, Result};
use crate::matrix::DenseMatrix;

/// Largest entry of `|qᵀq − I|` tolerated by [`leverage_scores`].
pub const ORTHONORMAL_TOL: f64 = 1e-8;

pub fn orthonormality_deviation(q: &DenseMatrix) -> f64 {
    let g = q.t_mul_unchecked(q);
    g.sub(&DenseMatrix::identity(q.cols()))
        .map(|d| d.max_abs())
        .unwrap_or(f64::INFINITY)
}

/// Squared row norms of an orthonormal basis.
pub fn leverage_scores(q: &DenseMatrix) -> Result<Vec<f64>> {
    let deviation = orthonormality_deviation(q);
    if deviation > ORTHONORMAL_TOL {
        return Err(CurError::NotOrthonormal { deviation });
    }
    Ok((0..q.rows())
        .map(|i| q.row(i).iter().map(|v| v * v).sum())
        .collect())
}
