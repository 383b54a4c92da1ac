//! Minimum-norm solution of `min ‖B_ε x − b‖₂` for a wide `B` (rows ≤ cols)
//! whose small singular values are discarded first.
//!
//! The solve follows three steps:
//!
//! 1. ε-partition `B = W₁Σ₁V₁ᵀ + W₂Σ₂V₂ᵀ` (σ ≤ ε goes to the second block);
//! 2. project onto the kept column space, `P = W₁ᵀB` and `c = W₁ᵀb`, which
//!    turns the problem into a full-row-rank underdetermined one;
//! 3. factor `Pᵀ = QR` and return `x = Q R⁻ᵀ c`, the minimum-norm solution.
//!
//! The factorization is independent of the right-hand side, so
//! [`UnderdeterminedSolver`] prepares it once and solves each right-hand side
//! as its own vector problem.

use crate::error::{CurError, Result};
use crate::kernels::qr::thin_qr;
use crate::kernels::svd::{eps_partition, EpsPartition};
use crate::matrix::{dot, DenseMatrix};

/// Outcome flag of a stable solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Ok,
    /// ε was at least σ_max: nothing survives truncation and the solution
    /// is the zero vector.
    RankZero,
}

#[derive(Clone, Debug)]
pub struct UnderdeterminedSolver {
    /// `W₁`, `rows x r`.
    w1: DenseMatrix,
    /// `Q` of `Pᵀ = QR`, `cols x r`.
    q: DenseMatrix,
    /// `R` of `Pᵀ = QR`, `r x r` upper triangular.
    r: DenseMatrix,
    rows: usize,
    cols: usize,
    rank_kept: usize,
    k_eps: usize,
}

impl UnderdeterminedSolver {
    pub fn new(b_mat: &DenseMatrix, eps: f64) -> Result<Self> {
        let (rows, cols) = b_mat.shape();
        if rows > cols {
            return Err(CurError::dim(
                "stable_underdetermined_solve",
                format!("expected rows <= cols, got {rows}x{cols}"),
            ));
        }
        let part = eps_partition(b_mat, eps)?;
        Self::from_partition(b_mat, &part)
    }

    pub fn from_partition(b_mat: &DenseMatrix, part: &EpsPartition) -> Result<Self> {
        let (rows, cols) = b_mat.shape();
        let r = part.rank_kept;
        let w1 = part.w1();
        if r == 0 {
            return Ok(UnderdeterminedSolver {
                w1,
                q: DenseMatrix::zeros(cols, 0),
                r: DenseMatrix::zeros(0, 0),
                rows,
                cols,
                rank_kept: 0,
                k_eps: part.k_eps,
            });
        }
        // Pᵀ = Bᵀ W₁ (cols x r)
        let pt = b_mat.t_mul_unchecked(&w1);
        let qr = thin_qr(&pt)?;
        if (0..r).any(|i| qr.r.get(i, i) == 0.0) {
            return Err(CurError::RankDeficient {
                op: "stable_underdetermined_solve",
                detail: "projected system lost rank".into(),
            });
        }
        Ok(UnderdeterminedSolver {
            w1,
            q: qr.q,
            r: qr.r,
            rows,
            cols,
            rank_kept: r,
            k_eps: part.k_eps,
        })
    }

    pub fn rank_kept(&self) -> usize {
        self.rank_kept
    }

    pub fn k_eps(&self) -> usize {
        self.k_eps
    }

    pub fn status(&self) -> SolveStatus {
        if self.rank_kept == 0 {
            SolveStatus::RankZero
        } else {
            SolveStatus::Ok
        }
    }

    /// Solution length (`cols` of the system matrix).
    pub fn solution_len(&self) -> usize {
        self.cols
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.rows {
            return Err(CurError::dim(
                "stable_underdetermined_solve",
                format!(
                    "rhs has length {}, system has {} rows",
                    rhs.len(),
                    self.rows
                ),
            ));
        }
        let r = self.rank_kept;
        if r == 0 {
            return Ok(vec![0.0; self.cols]);
        }
        // c = W₁ᵀ b
        let c = self.w1.t_matvec(rhs);
        // Rᵀ y = c, forward substitution
        let mut y = vec![0.0; r];
        for i in 0..r {
            let mut s = c[i];
            for (j, yj) in y.iter().enumerate().take(i) {
                s -= self.r.get(j, i) * yj;
            }
            y[i] = s / self.r.get(i, i);
        }
        // x = Q y
        Ok((0..self.cols).map(|i| dot(self.q.row(i), &y)).collect())
    }
}

/// Solution vector plus the truncation bookkeeping of one solve.
#[derive(Clone, Debug)]
pub struct StableSolution {
    pub x: Vec<f64>,
    pub rank_kept: usize,
    pub status: SolveStatus,
}

pub fn stable_underdetermined_solve(
    b_mat: &DenseMatrix,
    rhs: &[f64],
    eps: f64,
) -> Result<StableSolution> {
    let solver = UnderdeterminedSolver::new(b_mat, eps)?;
    let x = solver.solve(rhs)?;
    Ok(StableSolution {
        x,
        rank_kept: solver.rank_kept(),
        status: solver.status(),
    })
}
