//! Householder QR, thin and column-pivoted.

use crate::error::{CurError, Result};
use crate::matrix::{dot, norm2, DenseMatrix, IndexSet};

/// Relative width inside which two residual column norms count as tied.
pub const PIVOT_TIE_TOL: f64 = 1e-14;

/// Thin QR factors: `q` is `rows x cols` with orthonormal columns, `r` is
/// `cols x cols` upper triangular with a non-negative diagonal.
#[derive(Clone, Debug)]
pub struct ThinQR {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

/// Column-pivoted QR truncated after `pivots.len()` steps.
///
/// `r` holds the first `pivots.len()` rows of the triangular factor with its
/// columns in pivot order (`permutation`), so for a full-length run
/// `q * r == m(:, permutation)`.
#[derive(Clone, Debug)]
pub struct PivotedQR {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
    pub pivots: IndexSet,
    pub permutation: Vec<usize>,
    /// First step at which every remaining residual column was exactly zero.
    /// The pivot chosen there (and after) came from the tie-break alone.
    pub degenerate_from: Option<usize>,
}

impl PivotedQR {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate_from.is_some()
    }
}

/// Column-major scratch space for Householder sweeps.
struct Columns {
    cols: Vec<Vec<f64>>,
}

impl Columns {
    fn from_matrix(m: &DenseMatrix) -> Self {
        let mut cols = vec![Vec::with_capacity(m.rows()); m.cols()];
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                cols[j].push(v);
            }
        }
        Columns { cols }
    }

    /// Reflects column `j` onto `alpha * e_j` and applies the reflector to
    /// every later column. Returns the unit Householder vector (zero when the
    /// column is already zero below the diagonal) and `alpha`.
    fn reflect(&mut self, j: usize) -> (Vec<f64>, f64) {
        let x = &self.cols[j][j..];
        let nrm = norm2(x);
        if nrm == 0.0 {
            return (vec![0.0; x.len()], 0.0);
        }
        let alpha = if x[0] > 0.0 { -nrm } else { nrm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vn = norm2(&v);
        if vn == 0.0 {
            return (vec![0.0; x.len()], alpha);
        }
        for e in v.iter_mut() {
            *e /= vn;
        }
        for t in j + 1..self.cols.len() {
            let c = &mut self.cols[t][j..];
            let s = 2.0 * dot(&v, c);
            if s != 0.0 {
                for (ce, ve) in c.iter_mut().zip(&v) {
                    *ce -= s * ve;
                }
            }
        }
        let c = &mut self.cols[j];
        c[j] = alpha;
        for e in c[j + 1..].iter_mut() {
            *e = 0.0;
        }
        (v, alpha)
    }
}

/// Accumulates `H_0 H_1 ... H_{s-1}` applied to the first `ncols` columns of
/// the identity.
fn form_q(rows: usize, ncols: usize, reflectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = (0..ncols)
        .map(|j| {
            let mut e = vec![0.0; rows];
            e[j] = 1.0;
            e
        })
        .collect();
    for (j, v) in reflectors.iter().enumerate().rev() {
        for col in q.iter_mut() {
            let c = &mut col[j..];
            let s = 2.0 * dot(v, c);
            if s != 0.0 {
                for (ce, ve) in c.iter_mut().zip(v) {
                    *ce -= s * ve;
                }
            }
        }
    }
    q
}

/// Flips signs so that every diagonal entry of `r` is non-negative.
fn normalize_signs(q: &mut [Vec<f64>], r_rows: &mut [Vec<f64>]) {
    for (j, row) in r_rows.iter_mut().enumerate() {
        if row[j] < 0.0 {
            for e in row.iter_mut() {
                *e = -*e;
            }
            for e in q[j].iter_mut() {
                *e = -*e;
            }
        }
    }
}

fn assemble(
    rows: usize,
    q_cols: &[Vec<f64>],
    r_rows: &[Vec<f64>],
    r_cols: usize,
) -> (DenseMatrix, DenseMatrix) {
    let k = q_cols.len();
    let q = DenseMatrix::from_fn(rows, k, |i, j| q_cols[j][i]);
    let r = DenseMatrix::from_fn(r_rows.len(), r_cols, |i, j| r_rows[i][j]);
    (q, r)
}

/// Thin Householder QR of a tall (or square) matrix.
pub fn thin_qr(m: &DenseMatrix) -> Result<ThinQR> {
    let (rows, cols) = m.shape();
    if cols > rows {
        return Err(CurError::dim(
            "thin_qr",
            format!("{rows}x{cols} has more columns than rows"),
        ));
    }
    let mut work = Columns::from_matrix(m);
    let mut reflectors = Vec::with_capacity(cols);
    for j in 0..cols {
        let (v, _) = work.reflect(j);
        reflectors.push(v);
    }
    let mut q_cols = form_q(rows, cols, &reflectors);
    let mut r_rows: Vec<Vec<f64>> = (0..cols)
        .map(|i| {
            (0..cols)
                .map(|j| if j >= i { work.cols[j][i] } else { 0.0 })
                .collect()
        })
        .collect();
    normalize_signs(&mut q_cols, &mut r_rows);
    let (q, r) = assemble(rows, &q_cols, &r_rows, cols);
    Ok(ThinQR { q, r })
}

/// Orthonormal basis for the column space of a tall matrix (the `q` factor).
pub fn orthonormal_basis(m: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(thin_qr(m)?.q)
}

/// Businger–Golub column-pivoted QR stopped after `num_pivots` steps.
///
/// At each step the remaining column with the largest residual norm is
/// chosen. Norms within [`PIVOT_TIE_TOL`] (relative) of each other are tied
/// and the tie goes to the lower original column index. Residual norms are
/// recomputed from the partially reduced matrix at every step, never
/// downdated.
pub fn cpqr(m: &DenseMatrix, num_pivots: usize) -> Result<PivotedQR> {
    let (rows, cols) = m.shape();
    if num_pivots > rows.min(cols) {
        return Err(CurError::dim(
            "cpqr",
            format!("{num_pivots} pivots requested from a {rows}x{cols} matrix"),
        ));
    }
    let mut work = Columns::from_matrix(m);
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut reflectors = Vec::with_capacity(num_pivots);
    let mut degenerate_from = None;

    for j in 0..num_pivots {
        let norms: Vec<f64> = (j..cols).map(|t| norm2(&work.cols[t][j..])).collect();
        let mut best = 0;
        for t in 1..norms.len() {
            let (nt, nb) = (norms[t], norms[best]);
            let scale = nt.max(nb);
            if nt - nb > PIVOT_TIE_TOL * scale
                || ((nt - nb).abs() <= PIVOT_TIE_TOL * scale && perm[j + t] < perm[j + best])
            {
                best = t;
            }
        }
        if norms[best] == 0.0 && degenerate_from.is_none() {
            degenerate_from = Some(j);
        }
        work.cols.swap(j, j + best);
        perm.swap(j, j + best);
        let (v, _) = work.reflect(j);
        reflectors.push(v);
    }

    let mut q_cols = form_q(rows, num_pivots, &reflectors);
    let mut r_rows: Vec<Vec<f64>> = (0..num_pivots)
        .map(|i| {
            (0..cols)
                .map(|j| if j >= i { work.cols[j][i] } else { 0.0 })
                .collect()
        })
        .collect();
    normalize_signs(&mut q_cols, &mut r_rows);
    let (q, r) = assemble(rows, &q_cols, &r_rows, cols);
    let pivots = IndexSet::new(perm[..num_pivots].to_vec(), cols)?;
    Ok(PivotedQR {
        q,
        r,
        pivots,
        permutation: perm,
        degenerate_from,
    })
}
