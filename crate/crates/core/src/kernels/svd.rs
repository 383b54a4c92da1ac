//! Thin SVD, the ε-partition of the spectrum and truncated pseudoinverse
//! application.

use crate::error::{CurError, Result};
use crate::kernels::qr::thin_qr;
use crate::matrix::{dot, norm2, DenseMatrix};

/// Sweep budget for the Jacobi iteration; exceeding it is reported as
/// [`CurError::NoConvergence`].
const JACOBI_MAX_SWEEPS: usize = 80;

/// Thin SVD `m = w * diag(sigma) * vᵀ` with `sigma` non-increasing.
#[derive(Clone, Debug)]
pub struct ThinSVD {
    pub w: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl ThinSVD {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }
}

pub fn thin_svd(m: &DenseMatrix) -> Result<ThinSVD> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(CurError::Empty {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if !m.is_finite() {
        let pos = m.data().iter().position(|v| !v.is_finite()).unwrap_or(0);
        return Err(CurError::NonFinite {
            row: pos / m.cols(),
            col: pos % m.cols(),
        });
    }
    if m.rows() >= m.cols() {
        jacobi_tall(m)
    } else {
        let t = jacobi_tall(&m.transpose())?;
        Ok(ThinSVD {
            w: t.v,
            sigma: t.sigma,
            v: t.w,
        })
    }
}

/// One-sided (Hestenes) Jacobi on the triangular factor of a thin QR.
///
/// Column pairs of `R` are rotated until every pair is orthogonal to
/// `sqrt(n)·u` relative to their norms. Singular values come out with small
/// relative error, so a numerically rank-deficient matrix keeps tiny but
/// nonzero trailing values instead of exact zeros.
fn jacobi_tall(m: &DenseMatrix) -> Result<ThinSVD> {
    let n = m.cols();
    let qr = thin_qr(m)?;
    let mut g: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| qr.r.get(i, j)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let tol = (n as f64).sqrt() * f64::EPSILON;
    let mut converged = n == 1;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                // scaled norms: squared norms of tiny columns underflow
                let (na, nb) = (norm2(&g[p]), norm2(&g[q]));
                let gamma = dot(&g[p], &g[q]);
                if na == 0.0 || nb == 0.0 || gamma == 0.0 || gamma.abs() <= tol * na * nb {
                    continue;
                }
                let zeta = (nb - na) / gamma * ((nb + na) / 2.0);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                if t == 0.0 {
                    continue;
                }
                rotated = true;
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut g, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(CurError::NoConvergence { op: "thin_svd" });
    }

    let sigma: Vec<f64> = g.iter().map(|col| norm2(col)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    let mut u_r: Vec<Vec<f64>> = order
        .iter()
        .map(|&j| {
            let s = sigma[j];
            if s > 0.0 {
                g[j].iter().map(|x| x / s).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    complete_basis(&mut u_r, n);
    let u_r = DenseMatrix::from_fn(n, n, |i, j| u_r[j][i]);
    let w = qr.q.mul_unchecked(&u_r);
    let v = DenseMatrix::from_fn(n, n, |i, j| v[order[j]][i]);
    let sigma = order.iter().map(|&j| sigma[j]).collect();
    Ok(ThinSVD { w, sigma, v })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Fills the empty columns (zero singular values) with unit vectors
/// orthogonal to all others.
fn complete_basis(cols: &mut [Vec<f64>], n: usize) {
    let mut candidate = 0;
    for j in 0..cols.len() {
        if !cols[j].is_empty() {
            continue;
        }
        while candidate < n {
            let mut e = vec![0.0; n];
            e[candidate] = 1.0;
            candidate += 1;
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for other in cols.iter().filter(|c| !c.is_empty()) {
                    let d = dot(other, &e);
                    for (x, o) in e.iter_mut().zip(other) {
                        *x -= d * o;
                    }
                }
            }
            let nrm = norm2(&e);
            if nrm > 0.5 {
                cols[j] = e.into_iter().map(|x| x / nrm).collect();
                break;
            }
        }
    }
}

pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(thin_svd(m)?.sigma)
}

pub fn min_singular_value(m: &DenseMatrix) -> Result<f64> {
    Ok(thin_svd(m)?.sigma_min())
}

/// How the truncation threshold is specified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Absolute(f64),
    /// Multiple of the largest singular value of the matrix being truncated.
    Relative(f64),
}

/// The threshold used when a caller does not supply one.
pub const DEFAULT_EPS: f64 = 1e-15;

impl Default for Threshold {
    fn default() -> Self {
        Threshold::Absolute(DEFAULT_EPS)
    }
}

impl Threshold {
    pub fn resolve(self, sigma_max: f64) -> f64 {
        match self {
            Threshold::Absolute(e) => e,
            Threshold::Relative(r) => r * sigma_max,
        }
    }

    pub fn validate(self) -> Result<Self> {
        let v = match self {
            Threshold::Absolute(e) | Threshold::Relative(e) => e,
        };
        if !(v >= 0.0) || !v.is_finite() {
            return Err(CurError::param(
                "eps",
                format!("{v} must be finite and >= 0"),
            ));
        }
        Ok(self)
    }
}

/// Thin SVD split at ε: triplets with `sigma > eps` are kept, the rest
/// (`sigma <= eps`) are truncated.
#[derive(Clone, Debug)]
pub struct EpsPartition {
    pub svd: ThinSVD,
    pub eps: f64,
    pub rank_kept: usize,
    pub k_eps: usize,
}

impl EpsPartition {
    pub fn from_svd(svd: ThinSVD, eps: f64) -> Result<Self> {
        if !(eps >= 0.0) {
            return Err(CurError::param("eps", format!("{eps} must be >= 0")));
        }
        let rank_kept = svd.sigma.iter().take_while(|&&s| s > eps).count();
        let k_eps = svd.sigma.len() - rank_kept;
        Ok(EpsPartition {
            svd,
            eps,
            rank_kept,
            k_eps,
        })
    }

    pub fn kept_sigma(&self) -> &[f64] {
        &self.svd.sigma[..self.rank_kept]
    }

    pub fn truncated_sigma(&self) -> &[f64] {
        &self.svd.sigma[self.rank_kept..]
    }

    /// `W₁`, the kept left singular vectors.
    pub fn w1(&self) -> DenseMatrix {
        self.svd.w.leading_cols(self.rank_kept)
    }

    /// `V₁`, the kept right singular vectors.
    pub fn v1(&self) -> DenseMatrix {
        self.svd.v.leading_cols(self.rank_kept)
    }

    /// `V₂`, the truncated right singular vectors.
    pub fn v2(&self) -> DenseMatrix {
        let v = &self.svd.v;
        DenseMatrix::from_fn(v.rows(), self.k_eps, |i, j| v.get(i, self.rank_kept + j))
    }

    pub fn original_rows(&self) -> usize {
        self.svd.w.rows()
    }
}

pub fn eps_partition(m: &DenseMatrix, eps: f64) -> Result<EpsPartition> {
    if !(eps >= 0.0) {
        return Err(CurError::param("eps", format!("{eps} must be >= 0")));
    }
    EpsPartition::from_svd(thin_svd(m)?, eps)
}

/// `V₁ Σ₁⁻¹ (W₁ᵀ b)`, applied right to left so the pseudoinverse is never
/// formed.
pub fn eps_pinv_apply(part: &EpsPartition, b: &DenseMatrix) -> Result<DenseMatrix> {
    if b.rows() != part.original_rows() {
        return Err(CurError::dim(
            "eps_pinv_apply",
            format!(
                "right-hand side has {} rows, matrix has {}",
                b.rows(),
                part.original_rows()
            ),
        ));
    }
    let r = part.rank_kept;
    let w1 = part.w1();
    let mut coeff = w1.t_mul_unchecked(b);
    for (i, &s) in part.kept_sigma().iter().enumerate() {
        for c in coeff.row_mut(i) {
            *c /= s;
        }
    }
    let v1 = part.v1();
    if r == 0 {
        return Ok(DenseMatrix::zeros(v1.rows(), b.cols()));
    }
    Ok(v1.mul_unchecked(&coeff))
}
