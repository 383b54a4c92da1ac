//! A posteriori error certificates for CUR approximations.
//!
//! For CURCA with rows `I_*` and columns `J`, and any row-space approximator
//! `X` (`k x n`):
//!
//! ```text
//! ‖A − A^ε_{I_*,J}‖ ≤ ‖Q_C(I_*,:)†‖₂ · ‖Q_X(J,:)†‖₂ · (‖A − AX†X‖ + ‖E‖)
//! ```
//!
//! where `Q_C` spans `A(:,J)`, `Q_X` spans `Xᵀ`, and `‖E‖` is the truncated
//! part of the core: `√k_ε·ε` in the Frobenius norm, `ε` in the spectral
//! norm (zero when nothing is truncated). The product of the two factors is
//! the condition number `κ`.
//!
//! For CURBA with an additional column-space approximator `Y`:
//!
//! ```text
//! ‖A − CC†AR†R‖ ≤ ‖Q_X(J_*,:)†‖₂ ‖A − AX†X‖ + ‖Q_Y(I_*,:)†‖₂ ‖A − YY†A‖
//! ```

use crate::error::{CurError, Result};
use crate::kernels::{orthonormal_basis, singular_values, thin_svd};
use crate::matrix::{DenseMatrix, IndexSet};
use crate::norms::{factored_residual_norm, Norm};

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    /// `factor_rows · factor_cols`
    pub kappa: f64,
    /// `‖Q_C(I_*,:)†‖₂` (CURCA) or `‖Q_Y(I_*,:)†‖₂` (CURBA).
    pub factor_rows: f64,
    /// `‖Q_X(J,:)†‖₂`
    pub factor_cols: f64,
    /// `‖A − AX†X‖`
    pub residual: f64,
    /// `‖A − YY†A‖`; zero for CURCA reports.
    pub col_residual: f64,
    pub eps_term: f64,
    pub k_eps: usize,
    pub bound_value: f64,
    pub actual_error: Option<f64>,
    /// A basis block was singular or too short; the bound is `+∞`.
    pub infinite: bool,
}

impl BoundReport {
    pub fn with_actual(mut self, err: f64) -> Self {
        self.actual_error = Some(err);
        self
    }

    /// `bound_value ≥ actual_error`; true when no error was attached.
    pub fn holds(&self) -> bool {
        self.actual_error.is_none_or(|e| self.bound_value >= e)
    }
}

/// `1/σ_min(q(rows,:))` for an orthonormal `q`; infinite when the block is
/// short or its smallest singular value is at roundoff level
/// (`≤ rows(q)·u`).
fn inv_sigma_min(q: &DenseMatrix, rows: &[usize]) -> Result<f64> {
    if rows.len() < q.cols() {
        return Ok(f64::INFINITY);
    }
    let s = thin_svd(&q.select_rows(rows))?.sigma_min();
    let floor = q.rows() as f64 * f64::EPSILON;
    Ok(if s > floor { 1.0 / s } else { f64::INFINITY })
}

fn check(a: &DenseMatrix, x: &DenseMatrix, i_star: &IndexSet, j_set: &IndexSet) -> Result<()> {
    let (m, n) = a.shape();
    if x.cols() != n {
        return Err(CurError::dim(
            "bounds",
            format!("X has {} columns, A has {n}", x.cols()),
        ));
    }
    if x.rows() > n {
        return Err(CurError::dim(
            "bounds",
            format!("X is {}x{n}, expected a wide matrix", x.rows()),
        ));
    }
    if i_star.universe() != m || j_set.universe() != n {
        return Err(CurError::dim(
            "bounds",
            format!(
                "index universes {}x{} do not match a {m}x{n} matrix",
                i_star.universe(),
                j_set.universe()
            ),
        ));
    }
    Ok(())
}

/// `‖A − AX†X‖`: the part of `A` outside the row space of `X`. Directions
/// of `X` with `σ ≤ max(k, n)·u·σ_max` are treated as absent.
pub fn row_space_residual(a: &DenseMatrix, x: &DenseMatrix, norm: Norm) -> Result<f64> {
    if x.cols() != a.cols() {
        return Err(CurError::dim(
            "row_space_residual",
            format!("X has {} columns, A has {}", x.cols(), a.cols()),
        ));
    }
    let svd = thin_svd(x)?;
    let cutoff = x.rows().max(x.cols()) as f64 * f64::EPSILON * svd.sigma_max();
    let r = svd.sigma.iter().filter(|&&s| s > cutoff).count();
    let v = svd.v.leading_cols(r);
    let av = a.mul_unchecked(&v);
    Ok(factored_residual_norm(a, &av, &v.transpose(), norm))
}

/// Frobenius/spectral size of the truncated `k_ε x k_ε` block with 2-norm
/// at most `eps`.
fn eps_term(eps: f64, k_eps: usize, norm: Norm) -> f64 {
    if k_eps == 0 {
        return 0.0;
    }
    match norm {
        Norm::Frobenius => (k_eps as f64).sqrt() * eps,
        Norm::Spectral => eps,
    }
}

fn product(a: f64, b: f64) -> f64 {
    // 0 · ∞ only arises when the residual vanishes; keep the bound at 0.
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// CURCA / SCURCA certificate; `eps = 0` gives the plain CURCA bound.
pub fn curca_bound(
    a: &DenseMatrix,
    i_star: &IndexSet,
    j_set: &IndexSet,
    x: &DenseMatrix,
    eps: f64,
    norm: Norm,
) -> Result<BoundReport> {
    check(a, x, i_star, j_set)?;
    if !(eps >= 0.0) {
        return Err(CurError::param("eps", format!("{eps} must be >= 0")));
    }
    let c = a.select_cols(j_set.as_slice());
    if c.cols() > c.rows() {
        return Err(CurError::dim(
            "curca_bound",
            "more columns selected than rows",
        ));
    }
    let q_c = orthonormal_basis(&c)?;
    let q_x = orthonormal_basis(&x.transpose())?;
    let factor_rows = inv_sigma_min(&q_c, i_star.as_slice())?;
    let factor_cols = inv_sigma_min(&q_x, j_set.as_slice())?;
    let residual = row_space_residual(a, x, norm)?;
    let core = c.select_rows(i_star.as_slice());
    let k_eps = singular_values(&core)?
        .iter()
        .filter(|&&s| s <= eps)
        .count();
    let eps_term = eps_term(eps, k_eps, norm);
    let kappa = factor_rows * factor_cols;
    let infinite = !kappa.is_finite();
    let bound_value = if infinite {
        f64::INFINITY
    } else {
        product(kappa, residual + eps_term)
    };
    Ok(BoundReport {
        kappa,
        factor_rows,
        factor_cols,
        residual,
        col_residual: 0.0,
        eps_term,
        k_eps,
        bound_value,
        actual_error: None,
        infinite,
    })
}

/// `κ = ‖Q_C(I_*,:)†‖₂ ‖Q_X(J,:)†‖₂`.
pub fn condition_number_curca(
    a: &DenseMatrix,
    i_star: &IndexSet,
    j_set: &IndexSet,
    x: &DenseMatrix,
) -> Result<f64> {
    check(a, x, i_star, j_set)?;
    let c = a.select_cols(j_set.as_slice());
    if c.cols() > c.rows() {
        return Err(CurError::dim(
            "condition_number_curca",
            "more columns selected than rows",
        ));
    }
    let q_c = orthonormal_basis(&c)?;
    let q_x = orthonormal_basis(&x.transpose())?;
    Ok(inv_sigma_min(&q_c, i_star.as_slice())? * inv_sigma_min(&q_x, j_set.as_slice())?)
}

/// CURBA certificate. `y` defaults to `A(:, J_*)`.
pub fn curba_bound(
    a: &DenseMatrix,
    i_star: &IndexSet,
    j_star: &IndexSet,
    x: &DenseMatrix,
    y: Option<&DenseMatrix>,
    norm: Norm,
) -> Result<BoundReport> {
    check(a, x, i_star, j_star)?;
    let default_y;
    let y = match y {
        Some(y) => y,
        None => {
            default_y = a.select_cols(j_star.as_slice());
            &default_y
        }
    };
    if y.rows() != a.rows() || y.cols() > y.rows() {
        return Err(CurError::dim(
            "curba_bound",
            format!(
                "Y is {}x{}, expected a tall matrix with {} rows",
                y.rows(),
                y.cols(),
                a.rows()
            ),
        ));
    }
    let q_x = orthonormal_basis(&x.transpose())?;
    let q_y = orthonormal_basis(y)?;
    let factor_cols = inv_sigma_min(&q_x, j_star.as_slice())?;
    let factor_rows = inv_sigma_min(&q_y, i_star.as_slice())?;
    let residual = row_space_residual(a, x, norm)?;
    let col_residual = row_space_residual(&a.transpose(), &y.transpose(), norm)?;
    let infinite = !(factor_rows.is_finite() && factor_cols.is_finite());
    let bound_value = if infinite {
        f64::INFINITY
    } else {
        product(factor_cols, residual) + product(factor_rows, col_residual)
    };
    Ok(BoundReport {
        kappa: factor_rows * factor_cols,
        factor_rows,
        factor_cols,
        residual,
        col_residual,
        eps_term: 0.0,
        k_eps: 0,
        bound_value,
        actual_error: None,
        infinite,
    })
}
