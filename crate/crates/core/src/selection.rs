//! Initial row and column index selection (`|I| = |J| = k`).

use std::fmt;
use std::str::FromStr;

use crate::error::{CurError, Result};
use crate::kernels::{cpqr, gaussian_sketch};
use crate::matrix::{DenseMatrix, IndexSet};
use crate::rng::{below, seeded};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// CPQR on a Gaussian row sketch for `J`, then CPQR on `A(:, J)ᵀ` for `I`.
    RandPivot,
    /// `I` and `J` drawn uniformly without replacement.
    Uniform,
    /// CPQR on `A` for `J` and on `Aᵀ` for `I`, with no coupling. This is
    /// the known-unsafe baseline: the core `A(I, J)` can be nearly singular
    /// even when both index sets are individually good.
    IndependentCpqr,
    /// CPQR on `A` for `J`, then CPQR on `A(:, J)ᵀ` for `I`.
    DependentCpqr,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::RandPivot => "rand_pivot",
            Strategy::Uniform => "uniform",
            Strategy::IndependentCpqr => "independent",
            Strategy::DependentCpqr => "dependent",
        }
    }

    /// Whether rows are chosen from the already-chosen columns.
    pub fn is_dependent(self) -> bool {
        matches!(self, Strategy::RandPivot | Strategy::DependentCpqr)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = CurError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rand_pivot" | "randpivot" | "sketch" => Ok(Strategy::RandPivot),
            "uniform" => Ok(Strategy::Uniform),
            "independent" | "independent_cpqr" => Ok(Strategy::IndependentCpqr),
            "dependent" | "dependent_cpqr" => Ok(Strategy::DependentCpqr),
            other => Err(CurError::param(
                "strategy",
                format!("unknown strategy `{other}`"),
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SelectionResult {
    pub row_indices: IndexSet,
    pub col_indices: IndexSet,
    /// The row sketch `X = ΩA` when the strategy produced one.
    pub row_space_approx: Option<DenseMatrix>,
    pub strategy: Strategy,
    /// Some pivot was picked from an all-zero residual by tie-break alone.
    pub degenerate: bool,
}

impl SelectionResult {
    pub fn k(&self) -> usize {
        self.col_indices.len()
    }
}

fn check_rank(a: &DenseMatrix, k: usize) -> Result<()> {
    if k == 0 || k > a.rows().min(a.cols()) {
        return Err(CurError::dim(
            "selection",
            format!(
                "k = {k} must be in 1..={} for a {}x{} matrix",
                a.rows().min(a.cols()),
                a.rows(),
                a.cols()
            ),
        ));
    }
    Ok(())
}

/// Rows of `A(:, J)` chosen by CPQR on its transpose.
fn rows_from_columns(a: &DenseMatrix, cols: &IndexSet, k: usize) -> Result<(IndexSet, bool)> {
    let c_t = a.select_cols(cols.as_slice()).transpose();
    let p = cpqr(&c_t, k)?;
    let degenerate = p.is_degenerate();
    Ok((p.pivots, degenerate))
}

/// Pivoting on a random sketch with a `k x m` Gaussian embedding.
pub fn rand_pivot(a: &DenseMatrix, k: usize, seed: u64) -> Result<SelectionResult> {
    rand_pivot_oversized(a, k, 0, seed)
}

/// [`rand_pivot`] with a sketch of `k + oversize` rows; still `k` pivots.
pub fn rand_pivot_oversized(
    a: &DenseMatrix,
    k: usize,
    oversize: usize,
    seed: u64,
) -> Result<SelectionResult> {
    check_rank(a, k)?;
    let x = gaussian_sketch(a, k + oversize, seed)?;
    let pj = cpqr(&x, k)?;
    let (rows, deg_rows) = rows_from_columns(a, &pj.pivots, k)?;
    Ok(SelectionResult {
        row_indices: rows,
        col_indices: pj.pivots.clone(),
        row_space_approx: Some(x),
        strategy: Strategy::RandPivot,
        degenerate: pj.is_degenerate() || deg_rows,
    })
}

/// `k` distinct indices of `0..universe`, uniformly without replacement
/// (partial Fisher–Yates), in draw order.
pub fn uniform_indices(universe: usize, k: usize, seed: u64) -> Result<IndexSet> {
    if k > universe {
        return Err(CurError::param(
            "k",
            format!("cannot draw {k} distinct indices from {universe}"),
        ));
    }
    let mut rng = seeded(seed);
    let mut pool: Vec<usize> = (0..universe).collect();
    for i in 0..k {
        let j = i + below(&mut rng, universe - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    IndexSet::new(pool, universe)
}

/// Uniform rows and columns; the two draws use the seeds `seed` and `seed + 1`.
pub fn uniform_pair(a: &DenseMatrix, k: usize, seed: u64) -> Result<SelectionResult> {
    check_rank(a, k)?;
    Ok(SelectionResult {
        row_indices: uniform_indices(a.rows(), k, seed)?,
        col_indices: uniform_indices(a.cols(), k, seed.wrapping_add(1))?,
        row_space_approx: None,
        strategy: Strategy::Uniform,
        degenerate: false,
    })
}

pub fn independent_cpqr_pair(a: &DenseMatrix, k: usize) -> Result<SelectionResult> {
    check_rank(a, k)?;
    let pj = cpqr(a, k)?;
    let pi = cpqr(&a.transpose(), k)?;
    Ok(SelectionResult {
        degenerate: pj.is_degenerate() || pi.is_degenerate(),
        row_indices: pi.pivots,
        col_indices: pj.pivots,
        row_space_approx: None,
        strategy: Strategy::IndependentCpqr,
    })
}

pub fn dependent_cpqr_pair(a: &DenseMatrix, k: usize) -> Result<SelectionResult> {
    check_rank(a, k)?;
    let pj = cpqr(a, k)?;
    let (rows, deg_rows) = rows_from_columns(a, &pj.pivots, k)?;
    Ok(SelectionResult {
        degenerate: pj.is_degenerate() || deg_rows,
        row_indices: rows,
        col_indices: pj.pivots,
        row_space_approx: None,
        strategy: Strategy::DependentCpqr,
    })
}

/// Dispatches on `strategy`; `seed` is ignored by the deterministic ones.
pub fn select(a: &DenseMatrix, k: usize, strategy: Strategy, seed: u64) -> Result<SelectionResult> {
    match strategy {
        Strategy::RandPivot => rand_pivot(a, k, seed),
        Strategy::Uniform => uniform_pair(a, k, seed),
        Strategy::IndependentCpqr => independent_cpqr_pair(a, k),
        Strategy::DependentCpqr => dependent_cpqr_pair(a, k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(s: &IndexSet) -> Vec<usize> {
        let mut v = s.as_slice().to_vec();
        v.sort_unstable();
        v
    }

    #[test]
    fn diagonal_rows_follow_columns() {
        let a = DenseMatrix::from_diag(&[5.0, 3.0, 1.0]);
        let mut heaviest = 0;
        for seed in 0..20 {
            let s = rand_pivot(&a, 2, seed).unwrap();
            assert_eq!(
                sorted(&s.row_indices),
                sorted(&s.col_indices),
                "seed {seed}"
            );
            assert!(!s.degenerate);
            if sorted(&s.col_indices) == vec![0, 1] {
                heaviest += 1;
            }
        }
        assert!(heaviest >= 10);
    }

    #[test]
    fn zero_matrix_is_flagged() {
        let s = rand_pivot(&DenseMatrix::zeros(4, 3), 1, 0).unwrap();
        assert_eq!(s.col_indices.as_slice(), &[0]);
        assert_eq!(s.row_indices.as_slice(), &[0]);
        assert!(s.degenerate);
    }

    #[test]
    fn uniform_exhaustive_and_deterministic() {
        let all = uniform_indices(5, 5, 3).unwrap();
        assert_eq!(sorted(&all), vec![0, 1, 2, 3, 4]);
        assert_eq!(
            uniform_indices(100, 7, 9).unwrap(),
            uniform_indices(100, 7, 9).unwrap()
        );
        assert!(uniform_indices(3, 4, 0).is_err());
    }

    #[test]
    fn two_by_two_independent_vs_dependent() {
        let e = 1e-8;
        let a = DenseMatrix::from_rows(&[&[e, 1.0], &[1.0, 0.0]]);
        let ind = independent_cpqr_pair(&a, 1).unwrap();
        assert_eq!(
            (ind.row_indices.as_slice(), ind.col_indices.as_slice()),
            (&[0][..], &[0][..])
        );
        let dep = dependent_cpqr_pair(&a, 1).unwrap();
        assert_eq!(
            (dep.row_indices.as_slice(), dep.col_indices.as_slice()),
            (&[1][..], &[0][..])
        );
    }

    #[test]
    fn diagonal_selection_agrees() {
        let a = DenseMatrix::from_diag(&[1.0, 4.0, 2.0, 3.0]);
        let ind = independent_cpqr_pair(&a, 2).unwrap();
        let dep = dependent_cpqr_pair(&a, 2).unwrap();
        assert_eq!(ind.col_indices.as_slice(), &[1, 3]);
        assert_eq!(ind.row_indices, dep.row_indices);
        assert_eq!(ind.col_indices, dep.col_indices);
    }

    #[test]
    fn k_out_of_range() {
        let a = DenseMatrix::identity(3);
        assert!(rand_pivot(&a, 4, 0).is_err());
        assert!(dependent_cpqr_pair(&a, 0).is_err());
    }
}
