//! CUR factorizations in factored form `A ≈ left · right`, and the error
//! metrics used to compare them.
//!
//! With `C = A(:,J)`, `U = A(I,J)` and `R = A(I,:)`:
//!
//! | mode                  | left                | right    |
//! |-----------------------|---------------------|----------|
//! | `curca_naive_solve`   | `C / U` (dense solve) | `R`    |
//! | `curca_explicit_pinv` | `C · (VΣ⁻¹Wᵀ)`      | `R`      |
//! | `curca_stable`        | `(C·V)·Σ⁻¹`         | `Wᵀ·R`   |
//! | `scurca_factored`     | `(C·V₁)·Σ₁⁻¹`       | `W₁ᵀ·R`  |
//! | `scurca_rowwise`      | rows `sᵢ` with `Uᵀ_ε sᵢ ≈ cᵢ` | `R` |
//! | `curba_stable`        | `Q_C`               | `(Q_Cᵀ A Q_R) Q_Rᵀ` |
//!
//! The CURCA modes expect `|I| ≥ |J|`. Column-oversampled input
//! (`|I| < |J|`) is handled by running the same code on `Aᵀ` and
//! transposing the factors back.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{CurError, Result};
use crate::kernels::{cpqr, eps_partition, thin_qr, thin_svd, UnderdeterminedSolver};
use crate::matrix::{norm2, DenseMatrix, IndexSet};
use crate::norms::{factored_residual_norm, matrix_norm, Norm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoreMode {
    CurcaNaiveSolve,
    CurcaExplicitPinv,
    CurcaStable,
    ScurcaFactored,
    ScurcaRowwise,
    CurbaStable,
}

impl CoreMode {
    pub const ALL: [CoreMode; 6] = [
        CoreMode::CurcaNaiveSolve,
        CoreMode::CurcaExplicitPinv,
        CoreMode::CurcaStable,
        CoreMode::ScurcaFactored,
        CoreMode::ScurcaRowwise,
        CoreMode::CurbaStable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoreMode::CurcaNaiveSolve => "curca_naive_solve",
            CoreMode::CurcaExplicitPinv => "curca_explicit_pinv",
            CoreMode::CurcaStable => "curca_stable",
            CoreMode::ScurcaFactored => "scurca_factored",
            CoreMode::ScurcaRowwise => "scurca_rowwise",
            CoreMode::CurbaStable => "curba_stable",
        }
    }

    pub fn uses_eps(self) -> bool {
        matches!(self, CoreMode::ScurcaFactored | CoreMode::ScurcaRowwise)
    }
}

impl fmt::Display for CoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoreMode {
    type Err = CurError;

    fn from_str(s: &str) -> Result<Self> {
        let mode = match s {
            "curca_naive_solve" | "naive" | "naive_solve" => CoreMode::CurcaNaiveSolve,
            "curca_explicit_pinv" | "explicit_pinv" | "pinv" => CoreMode::CurcaExplicitPinv,
            "curca_stable" | "stable" | "curca" => CoreMode::CurcaStable,
            "scurca_factored" | "scurca" => CoreMode::ScurcaFactored,
            "scurca_rowwise" | "rowwise" => CoreMode::ScurcaRowwise,
            "curba_stable" | "curba" => CoreMode::CurbaStable,
            other => {
                return Err(CurError::param(
                    "mode",
                    format!("unknown core mode `{other}`"),
                ))
            }
        };
        Ok(mode)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurStatus {
    Ok,
    /// Every singular value of the core was truncated; the approximation
    /// is zero.
    RankZero,
}

impl fmt::Display for CurStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurStatus::Ok => "ok",
            CurStatus::RankZero => "rank_zero",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CurFactors {
    /// `m x r`
    pub left: DenseMatrix,
    /// `r x n`
    pub right: DenseMatrix,
    pub row_indices: IndexSet,
    pub col_indices: IndexSet,
    pub mode: CoreMode,
    pub eps_used: f64,
    /// Singular values of the core at or below `eps_used`.
    pub k_eps: usize,
    pub status: CurStatus,
}

impl CurFactors {
    pub fn inner_dim(&self) -> usize {
        self.left.cols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.left.rows(), self.right.cols())
    }

    fn transposed(self) -> CurFactors {
        CurFactors {
            left: self.right.transpose(),
            right: self.left.transpose(),
            row_indices: self.col_indices,
            col_indices: self.row_indices,
            ..self
        }
    }
}

fn check_indices(a: &DenseMatrix, i_set: &IndexSet, j_set: &IndexSet) -> Result<()> {
    let (m, n) = a.shape();
    if i_set.universe() != m || j_set.universe() != n {
        return Err(CurError::dim(
            "cur",
            format!(
                "index universes {}x{} do not match a {m}x{n} matrix",
                i_set.universe(),
                j_set.universe()
            ),
        ));
    }
    if i_set.is_empty() || j_set.is_empty() {
        return Err(CurError::param("indices", "I and J must be non-empty"));
    }
    Ok(())
}

/// Runs `f` with `|I| ≥ |J|`, transposing the problem if needed.
fn oriented(
    a: &DenseMatrix,
    i_set: &IndexSet,
    j_set: &IndexSet,
    f: impl FnOnce(&DenseMatrix, &IndexSet, &IndexSet) -> Result<CurFactors>,
) -> Result<CurFactors> {
    check_indices(a, i_set, j_set)?;
    if i_set.len() >= j_set.len() {
        f(a, i_set, j_set)
    } else {
        Ok(f(&a.transpose(), j_set, i_set)?.transposed())
    }
}

struct Blocks {
    c: DenseMatrix,
    u: DenseMatrix,
    r: DenseMatrix,
}

fn blocks(a: &DenseMatrix, i_set: &IndexSet, j_set: &IndexSet) -> Blocks {
    let c = a.select_cols(j_set.as_slice());
    Blocks {
        u: c.select_rows(i_set.as_slice()),
        r: a.select_rows(i_set.as_slice()),
        c,
    }
}

fn factors(
    left: DenseMatrix,
    right: DenseMatrix,
    i_set: &IndexSet,
    j_set: &IndexSet,
    mode: CoreMode,
) -> CurFactors {
    CurFactors {
        left,
        right,
        row_indices: i_set.clone(),
        col_indices: j_set.clone(),
        mode,
        eps_used: 0.0,
        k_eps: 0,
        status: CurStatus::Ok,
    }
}

fn singular_core(op: &'static str, sigma: &[f64]) -> CurError {
    CurError::Singular {
        op,
        detail: format!(
            "A(I,J) has a zero or subnormal singular value (sigma_max = {:e}); use an scurca mode",
            sigma.first().copied().unwrap_or(0.0)
        ),
    }
}

/// `X` with `X·U = C` through a dense LU solve. A rectangular `U` gets the
/// basic solution: the `|J|` rows of `U` chosen by CPQR on `Uᵀ` carry the
/// solve and the other columns of `X` are zero.
pub fn curca_naive_solve(
    a: &DenseMatrix,
    i_set: &IndexSet,
    j_set: &IndexSet,
) -> Result<CurFactors> {
    oriented(a, i_set, j_set, |a, i_set, j_set| {
        let Blocks { c, u, r } = blocks(a, i_set, j_set);
        let (ni, nj) = u.shape();
        let basic: Vec<usize> = if ni == nj {
            (0..ni).collect()
        } else {
            cpqr(&u.transpose(), nj)?.pivots.into_vec()
        };
        // X(:, basic) · U(basic, :) = C  ⇔  U(basic, :)ᵀ X(:, basic)ᵀ = Cᵀ
        let ub_t = u.select_rows(&basic).transpose();
        let lu = ub_t.to_nalgebra().lu();
        if !lu.is_invertible() {
            return Err(CurError::Singular {
                op: "curca_naive_solve",
                detail: "A(I,J) is exactly singular".into(),
            });
        }
        let ct = DMatrix::from_row_slice(nj, c.rows(), c.transpose().data());
        let xt = lu.solve(&ct).ok_or(CurError::Singular {
            op: "curca_naive_solve",
            detail: "A(I,J) is exactly singular".into(),
        })?;
        let mut left = DenseMatrix::zeros(c.rows(), ni);
        for (bj, &col) in basic.iter().enumerate() {
            for row in 0..c.rows() {
                left.set(row, col, xt[(bj, row)]);
            }
        }
        Ok(factors(left, r, i_set, j_set, CoreMode::CurcaNaiveSolve))
    })
}

/// `C · U†` with `U† = VΣ⁻¹Wᵀ` formed explicitly.
pub fn curca_explicit_pinv(
    a: &DenseMatrix,
    i_set: &IndexSet,
    j_set: &IndexSet,
) -> Result<CurFactors> {
    oriented(a, i_set, j_set, |a, i_set, j_set| {
        let Blocks { c, u, r } = blocks(a, i_set, j_set);
        let svd = thin_svd(&u)?;
        if svd.sigma.contains(&0.0) {
            return Err(singular_core("curca_explicit_pinv", &svd.sigma));
        }
        let mut v_scaled = svd.v.clone();
        for i in 0..v_scaled.rows() {
            for (x, s) in v_scaled.row_mut(i).iter_mut().zip(&svd.sigma) {
                *x /= s;
            }
        }
        let pinv = v_scaled.mul_unchecked(&svd.w.transpose());
        let left = c.mul_unchecked(&pinv);
        Ok(factors(left, r, i_set, j_set, CoreMode::CurcaExplicitPinv))
    })
}

/// Scales column `j` of `m` by `1/sigma[j]` in place.
fn scale_cols_inv(m: &mut DenseMatrix, sigma: &[f64]) {
    for i in 0..m.rows() {
        for (x, s) in m.row_mut(i).iter_mut().zip(sigma) {
            *x /= s;
        }
    }
}

/// `(C·V)Σ⁻¹ · (WᵀR)`, the pseudoinverse never formed.
pub fn curca_stable(a: &DenseMatrix, i_set: &IndexSet, j_set: &IndexSet) -> Result<CurFactors> {
    oriented(a, i_set, j_set, |a, i_set, j_set| {
        let Blocks { c, u, r } = blocks(a, i_set, j_set);
        let svd = thin_svd(&u)?;
        // a subnormal singular value has no reliable reciprocal
        if svd.sigma.iter().any(|&s| s < f64::MIN_POSITIVE) {
            return Err(singular_core("curca_stable", &svd.sigma));
        }
        let mut left = c.mul_unchecked(&svd.v);
        scale_cols_inv(&mut left, &svd.sigma);
        let right = svd.w.t_mul_unchecked(&r);
        Ok(factors(left, right, i_set, j_set, CoreMode::CurcaStable))
    })
}

fn check_eps(eps: f64, strict: bool) -> Result<()> {
    let ok = if strict { eps > 0.0 } else { eps >= 0.0 };
    if !ok || !eps.is_finite() {
        let need = if strict { "> 0" } else { ">= 0" };
        return Err(CurError::param(
            "eps",
            format!("{eps} must be finite and {need}"),
        ));
    }
    Ok(())
}

/// [`curca_stable`] restricted to the singular triplets of `U` above `eps`.
pub fn scurca_factored(
    a: &DenseMatrix,
    i_set: &IndexSet,
    j_set: &IndexSet,
    eps: f64,
) -> Result<CurFactors> {
    check_eps(eps, false)?;
    oriented(a, i_set, j_set, |a, i_set, j_set| {
        let Blocks { c, u, r } = blocks(a, i_set, j_set);
        let part = eps_partition(&u, eps)?;
        let mut left = c.mul_unchecked(&part.v1());
        scale_cols_inv(&mut left, part.kept_sigma());
        let right = part.w1().t_mul_unchecked(&r);
        let mut f = factors(left, right, i_set, j_set, CoreMode::ScurcaFactored);
        f.eps_used = eps;
        f.k_eps = part.k_eps;
        if part.rank_kept == 0 {
            f.status = CurStatus::RankZero;
        }
        Ok(f)
    })
}

/// Row-by-row SCURCA: every row `cᵢ` of `C` gets its own minimum-norm
/// solve of `Uᵀ_ε sᵢ = cᵢ`; `left` stacks the `sᵢ` and `right = R`.
///
/// The factorization of `Uᵀ` is shared; each row is solved independently,
/// so the result does not depend on row order.
pub fn scurca_rowwise(
    a: &DenseMatrix,
    i_set: &IndexSet,
    j_set: &IndexSet,
    eps: f64,
) -> Result<CurFactors> {
    check_eps(eps, true)?;
    oriented(a, i_set, j_set, |a, i_set, j_set| {
        let Blocks { c, u, r } = blocks(a, i_set, j_set);
        let solver = UnderdeterminedSolver::new(&u.transpose(), eps)?;
        let ni = u.rows();
        let mut left = DenseMatrix::zeros(c.rows(), ni);
        for row in 0..c.rows() {
            let s = solver.solve(c.row(row))?;
            left.row_mut(row).copy_from_slice(&s);
        }
        let mut f = factors(left, r, i_set, j_set, CoreMode::ScurcaRowwise);
        f.eps_used = eps;
        f.k_eps = solver.k_eps();
        if solver.rank_kept() == 0 {
            f.status = CurStatus::RankZero;
        }
        Ok(f)
    })
}

/// Whether the triangular factor of a thin QR is numerically singular:
/// some `|r_ii| ≤ max(rows, cols)·u·max_j |r_jj|`.
fn qr_rank_deficient(r: &DenseMatrix, dims: (usize, usize)) -> bool {
    let diag: Vec<f64> = (0..r.rows()).map(|i| r.get(i, i).abs()).collect();
    let top = diag.iter().copied().fold(0.0, f64::max);
    let cutoff = dims.0.max(dims.1) as f64 * f64::EPSILON * top;
    top == 0.0 || diag.iter().any(|&d| d <= cutoff)
}

/// `Q_C (Q_Cᵀ A Q_R) Q_Rᵀ` with `Q_C = qr(A(:,J))`, `Q_R = qr(A(I,:)ᵀ)`.
/// Needs a full pass over `A`.
pub fn curba_stable(a: &DenseMatrix, i_set: &IndexSet, j_set: &IndexSet) -> Result<CurFactors> {
    check_indices(a, i_set, j_set)?;
    let (m, n) = a.shape();
    let c = a.select_cols(j_set.as_slice());
    let rt = a.select_rows(i_set.as_slice()).transpose();
    if c.cols() > m || rt.cols() > n {
        return Err(CurError::dim(
            "curba_stable",
            format!(
                "|J| = {} or |I| = {} exceeds the matrix size",
                c.cols(),
                rt.cols()
            ),
        ));
    }
    let qc = thin_qr(&c)?;
    if qr_rank_deficient(&qc.r, c.shape()) {
        return Err(CurError::RankDeficient {
            op: "curba_stable",
            detail: "A(:,J) is numerically rank deficient".into(),
        });
    }
    let qr = thin_qr(&rt)?;
    if qr_rank_deficient(&qr.r, rt.shape()) {
        return Err(CurError::RankDeficient {
            op: "curba_stable",
            detail: "A(I,:) is numerically rank deficient".into(),
        });
    }
    let core = qc.q.t_mul_unchecked(a).mul_unchecked(&qr.q);
    let right = core.mul_unchecked(&qr.q.transpose());
    Ok(factors(qc.q, right, i_set, j_set, CoreMode::CurbaStable))
}

/// Dispatches on `mode`; `eps` is ignored by the modes that do not truncate.
pub fn decompose(
    a: &DenseMatrix,
    i_set: &IndexSet,
    j_set: &IndexSet,
    mode: CoreMode,
    eps: f64,
) -> Result<CurFactors> {
    match mode {
        CoreMode::CurcaNaiveSolve => curca_naive_solve(a, i_set, j_set),
        CoreMode::CurcaExplicitPinv => curca_explicit_pinv(a, i_set, j_set),
        CoreMode::CurcaStable => curca_stable(a, i_set, j_set),
        CoreMode::ScurcaFactored => scurca_factored(a, i_set, j_set, eps),
        CoreMode::ScurcaRowwise => scurca_rowwise(a, i_set, j_set, eps),
        CoreMode::CurbaStable => curba_stable(a, i_set, j_set),
    }
}

/// Dense `left · right`.
pub fn reconstruct(f: &CurFactors) -> DenseMatrix {
    f.left.mul_unchecked(&f.right)
}

fn check_shape(a: &DenseMatrix, f: &CurFactors) -> Result<()> {
    if a.shape() != f.shape() || f.left.cols() != f.right.rows() {
        return Err(CurError::dim(
            "cur error",
            format!(
                "factors of shape {:?} against a {:?} matrix",
                f.shape(),
                a.shape()
            ),
        ));
    }
    Ok(())
}

/// `‖A − left·right‖`, evaluated without forming the product in full.
pub fn absolute_error(a: &DenseMatrix, f: &CurFactors, norm: Norm) -> Result<f64> {
    check_shape(a, f)?;
    Ok(factored_residual_norm(a, &f.left, &f.right, norm))
}

/// `‖A − left·right‖ / ‖A‖`; zero for the zero matrix reproduced exactly.
pub fn relative_error(a: &DenseMatrix, f: &CurFactors, norm: Norm) -> Result<f64> {
    let err = absolute_error(a, f, norm)?;
    let scale = matrix_norm(a, norm);
    Ok(if scale == 0.0 {
        if err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        err / scale
    })
}

/// `‖A − [A]_k‖ / ‖A‖` from the singular values of `A`.
pub fn tsvd_error(a: &DenseMatrix, k: usize, norm: Norm) -> Result<f64> {
    let (m, n) = a.shape();
    if k > m.min(n) {
        return Err(CurError::param("k", format!("{k} exceeds min({m}, {n})")));
    }
    let sigma = thin_svd(a)?.sigma;
    tsvd_error_from_sigma(&sigma, k, norm)
}

/// [`tsvd_error`] for a precomputed non-increasing spectrum.
pub fn tsvd_error_from_sigma(sigma: &[f64], k: usize, norm: Norm) -> Result<f64> {
    if k > sigma.len() {
        return Err(CurError::param(
            "k",
            format!("{k} exceeds {} singular values", sigma.len()),
        ));
    }
    let total = match norm {
        Norm::Frobenius => norm2(sigma),
        Norm::Spectral => sigma.first().copied().unwrap_or(0.0),
    };
    if total == 0.0 {
        return Ok(0.0);
    }
    let tail = match norm {
        Norm::Frobenius => norm2(&sigma[k..]),
        Norm::Spectral => sigma.get(k).copied().unwrap_or(0.0),
    };
    Ok(tail / total)
}
