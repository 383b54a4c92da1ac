//! Growing an index set `I` by extra indices `I₀` so that the selected rows
//! of an orthonormal basis `Q_B` have a larger smallest singular value.
//!
//! Three ways to pick `I₀`:
//!
//! * projection (OS+P): CPQR on the unchosen rows projected onto the
//!   trailing right singular vectors of `Q_B(I,:)`;
//! * leverage (OS+L): the unchosen rows with the largest leverage scores;
//! * greedy (OS+E): one row at a time, the one maximizing `σ_min` of the
//!   enlarged block, evaluated exactly.
//!
//! The greedy step scores every candidate through the rank-one update of the
//! Gram matrix. With `Q_B(S,:)ᵀQ_B(S,:) = V diag(λ) Vᵀ` and `z = Vᵀq` for a
//! candidate row `q`, the new `σ_min²` is the smallest root of
//! `1 + Σ zᵢ² / (λᵢ − μ) = 0`, found by bisection. A round costs
//! `O(n·k²)` for the projections plus `O(n·k)` per bisection step, against
//! `O(n·|S|·k²)` for an SVD per candidate.

use std::fmt;
use std::str::FromStr;

use crate::error::{CurError, Result};
use crate::kernels::{cpqr, leverage_scores, orthonormal_basis, thin_svd};
use crate::matrix::{DenseMatrix, IndexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OversampleMode {
    Projection,
    Leverage,
    Greedy,
}

impl OversampleMode {
    pub const ALL: [OversampleMode; 3] = [
        OversampleMode::Projection,
        OversampleMode::Leverage,
        OversampleMode::Greedy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OversampleMode::Projection => "projection",
            OversampleMode::Leverage => "leverage",
            OversampleMode::Greedy => "greedy",
        }
    }
}

impl fmt::Display for OversampleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OversampleMode {
    type Err = CurError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "projection" | "os+p" | "p" => Ok(OversampleMode::Projection),
            "leverage" | "os+l" | "l" => Ok(OversampleMode::Leverage),
            "greedy" | "os+e" | "e" => Ok(OversampleMode::Greedy),
            other => Err(CurError::param(
                "oversample mode",
                format!("unknown mode `{other}`"),
            )),
        }
    }
}

/// How many extra indices to take: a fixed count or a `σ_min` target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OversampleConfig {
    pub mode: OversampleMode,
    pub p: Option<usize>,
    /// Target for `σ_min(Q_B(I∪I₀,:))`, in `(0, 1)`; projection mode only.
    pub tol: Option<f64>,
    pub max_rounds: usize,
}

impl OversampleConfig {
    pub fn fixed(mode: OversampleMode, p: usize) -> Self {
        OversampleConfig {
            mode,
            p: Some(p),
            tol: None,
            max_rounds: 0,
        }
    }

    pub fn tolerance(tol: f64, max_rounds: usize) -> Self {
        OversampleConfig {
            mode: OversampleMode::Projection,
            p: None,
            tol: Some(tol),
            max_rounds,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.p, self.tol) {
            (Some(_), None) => Ok(()),
            (None, Some(t)) => {
                check_tol(t)?;
                if self.mode != OversampleMode::Projection {
                    return Err(CurError::param(
                        "tol",
                        "the tolerance variant exists for projection mode only",
                    ));
                }
                Ok(())
            }
            _ => Err(CurError::param(
                "oversample",
                "set exactly one of p and tol",
            )),
        }
    }

    /// Runs the configured variant; fixed counts larger than `cols(b)` are
    /// split into chunks.
    pub fn apply(&self, b: &DenseMatrix, i_set: &IndexSet) -> Result<Oversampled> {
        self.validate()?;
        match (self.p, self.tol) {
            (Some(p), _) => os_iterated(b, i_set, p, self.mode),
            (None, Some(t)) => os_projection_tol(b, i_set, t, self.max_rounds),
            _ => unreachable!(),
        }
    }
}

/// Extra indices plus bookkeeping of how they were found.
#[derive(Clone, Debug, PartialEq)]
pub struct Oversampled {
    /// `I₀`, disjoint from the input set, in selection order.
    pub extra: IndexSet,
    /// A pivot came from an all-zero candidate pool by tie-break alone.
    pub degenerate: bool,
    /// Number of projection or greedy rounds run.
    pub rounds: usize,
    /// Tolerance variant: whether the target was reached. Always true for a
    /// fixed count that was delivered in full.
    pub target_met: bool,
}

impl Oversampled {
    fn none(universe: usize) -> Self {
        Oversampled {
            extra: IndexSet::empty(universe),
            degenerate: false,
            rounds: 0,
            target_met: true,
        }
    }

    /// `I ∪ I₀`.
    pub fn merged(&self, i_set: &IndexSet) -> Result<IndexSet> {
        i_set.union(&self.extra)
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CurError::param("tol", format!("{tol} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_inputs(b: &DenseMatrix, i_set: &IndexSet, p: usize, need_k_rows: bool) -> Result<()> {
    let (n, k) = b.shape();
    if k == 0 || k > n {
        return Err(CurError::dim(
            "oversampling",
            format!("basis must be tall with at least one column, got {n}x{k}"),
        ));
    }
    if i_set.universe() != n {
        return Err(CurError::dim(
            "oversampling",
            format!(
                "index universe {} does not match {n} rows",
                i_set.universe()
            ),
        ));
    }
    if need_k_rows && i_set.len() < k {
        return Err(CurError::param(
            "i_set",
            format!("needs at least k = {k} indices, got {}", i_set.len()),
        ));
    }
    let free = n - i_set.len();
    if p > free {
        return Err(CurError::param(
            "p",
            format!("{p} extra indices requested, only {free} unchosen"),
        ));
    }
    Ok(())
}

fn basis(b: &DenseMatrix, pre_orthonormal: bool) -> Result<DenseMatrix> {
    if pre_orthonormal {
        Ok(b.clone())
    } else {
        orthonormal_basis(b)
    }
}

/// One projection round on an orthonormal `q`: `p` new indices outside
/// `chosen`, plus the degenerate flag.
fn projection_step(q: &DenseMatrix, chosen: &[usize], p: usize) -> Result<(Vec<usize>, bool)> {
    let (n, k) = q.shape();
    let set = IndexSet::new(chosen.to_vec(), n)?;
    let svd = thin_svd(&q.select_rows(chosen))?;
    // thin_svd of a |S| x k block with |S| >= k returns all k right vectors.
    let v_trail = DenseMatrix::from_fn(k, p, |i, j| svd.v.get(i, k - p + j));
    let rest = set.complement();
    let projected = q.select_rows(&rest).mul_unchecked(&v_trail);
    let piv = cpqr(&projected.transpose(), p)?;
    let picked = piv.pivots.iter().map(|c| rest[c]).collect();
    Ok((picked, piv.is_degenerate()))
}

/// Projection oversampling (OS+P) with a fixed count `p ≤ k`.
pub fn os_projection(
    b: &DenseMatrix,
    i_set: &IndexSet,
    p: usize,
    pre_orthonormal: bool,
) -> Result<Oversampled> {
    check_inputs(b, i_set, p, true)?;
    let k = b.cols();
    if p > k {
        return Err(CurError::param(
            "p",
            format!("p = {p} exceeds k = {k}; use os_iterated"),
        ));
    }
    if p == 0 {
        return Ok(Oversampled::none(b.rows()));
    }
    let q = basis(b, pre_orthonormal)?;
    let (picked, degenerate) = projection_step(&q, i_set.as_slice(), p)?;
    Ok(Oversampled {
        extra: IndexSet::new(picked, b.rows())?,
        degenerate,
        rounds: 1,
        target_met: true,
    })
}

/// Projection oversampling driven by a target: each round adds as many
/// indices as there are singular values of the current block below `tol`.
pub fn os_projection_tol(
    b: &DenseMatrix,
    i_set: &IndexSet,
    tol: f64,
    max_rounds: usize,
) -> Result<Oversampled> {
    check_tol(tol)?;
    check_inputs(b, i_set, 0, true)?;
    let n = b.rows();
    let q = orthonormal_basis(b)?;
    let mut chosen = i_set.as_slice().to_vec();
    let mut extra = Vec::new();
    let mut degenerate = false;
    let mut rounds = 0;
    loop {
        let sigma = thin_svd(&q.select_rows(&chosen))?.sigma;
        let below = sigma.iter().filter(|&&s| s < tol).count();
        if below == 0 {
            return Ok(Oversampled {
                extra: IndexSet::new(extra, n)?,
                degenerate,
                rounds,
                target_met: true,
            });
        }
        let free = n - chosen.len();
        if rounds >= max_rounds || free == 0 {
            break;
        }
        let (picked, deg) = projection_step(&q, &chosen, below.min(free))?;
        degenerate |= deg;
        chosen.extend_from_slice(&picked);
        extra.extend(picked);
        rounds += 1;
    }
    Ok(Oversampled {
        extra: IndexSet::new(extra, n)?,
        degenerate,
        rounds,
        target_met: false,
    })
}

/// OS+L: the `p` unchosen rows of largest leverage; ties go to the lower
/// index.
pub fn os_leverage(b: &DenseMatrix, i_set: &IndexSet, p: usize) -> Result<Oversampled> {
    check_inputs(b, i_set, p, false)?;
    if p == 0 {
        return Ok(Oversampled::none(b.rows()));
    }
    let scores = leverage_scores(&orthonormal_basis(b)?)?;
    let mut rest = i_set.complement();
    // Stable sort on an ascending list keeps lower indices first among ties.
    rest.sort_by(|&x, &y| scores[y].total_cmp(&scores[x]));
    rest.truncate(p);
    Ok(Oversampled {
        extra: IndexSet::new(rest, b.rows())?,
        degenerate: false,
        rounds: 1,
        target_met: true,
    })
}

/// Smallest eigenvalue of `diag(lambda) + zzᵀ`, `lambda` ascending.
pub(crate) fn rank_one_min_eig(lambda: &[f64], z: &[f64]) -> f64 {
    let l0 = lambda[0];
    if z[0] == 0.0 || (lambda.len() > 1 && lambda[1] == l0) {
        return l0;
    }
    let z2: Vec<f64> = z.iter().map(|v| v * v).collect();
    let gaps: Vec<f64> = lambda.iter().map(|l| l - l0).collect();
    let secular = |delta: f64| -> f64 {
        1.0 - z2[0] / delta
            + gaps[1..]
                .iter()
                .zip(&z2[1..])
                .map(|(d, w)| w / (d - delta))
                .sum::<f64>()
    };
    let znorm2: f64 = z2.iter().sum();
    let mut lo = 0.0_f64;
    let mut hi = match gaps.get(1) {
        Some(&g) => g.min(znorm2),
        None => znorm2,
    };
    // The root lies in (0, hi]; the secular function increases on it.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if secular(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    l0 + lo
}

/// OS+E: `p` greedy rounds, each adding the unchosen row that maximizes
/// `σ_min` of the enlarged block. Ties go to the lower index.
pub fn os_greedy_minsv(b: &DenseMatrix, i_set: &IndexSet, p: usize) -> Result<Oversampled> {
    check_inputs(b, i_set, p, true)?;
    if p == 0 {
        return Ok(Oversampled::none(b.rows()));
    }
    let (n, k) = b.shape();
    let q = orthonormal_basis(b)?;
    let mut chosen = i_set.as_slice().to_vec();
    let mut in_set = vec![false; n];
    for &i in &chosen {
        in_set[i] = true;
    }
    let mut extra = Vec::with_capacity(p);
    for _ in 0..p {
        let svd = thin_svd(&q.select_rows(&chosen))?;
        // ascending eigenvalues of the Gram matrix and matching vectors
        let lambda: Vec<f64> = svd.sigma.iter().rev().map(|s| s * s).collect();
        let v_asc = DenseMatrix::from_fn(k, k, |i, j| svd.v.get(i, k - 1 - j));
        let z_all = q.mul_unchecked(&v_asc);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if in_set[j] {
                continue;
            }
            let mu = rank_one_min_eig(&lambda, z_all.row(j));
            if best.is_none_or(|(_, b)| mu > b) {
                best = Some((j, mu));
            }
        }
        let (j, _) = best.expect("check_inputs guarantees a free row");
        in_set[j] = true;
        chosen.push(j);
        extra.push(j);
    }
    Ok(Oversampled {
        extra: IndexSet::new(extra, n)?,
        degenerate: false,
        rounds: p,
        target_met: true,
    })
}

/// Any `p` up to the number of unchosen rows, in chunks of at most
/// `k = cols(b)` per call of the chosen mode.
pub fn os_iterated(
    b: &DenseMatrix,
    i_set: &IndexSet,
    p: usize,
    mode: OversampleMode,
) -> Result<Oversampled> {
    check_inputs(b, i_set, p, mode != OversampleMode::Leverage)?;
    let k = b.cols();
    let n = b.rows();
    match mode {
        OversampleMode::Leverage => return os_leverage(b, i_set, p),
        OversampleMode::Greedy => return os_greedy_minsv(b, i_set, p),
        OversampleMode::Projection => {}
    }
    if p <= k {
        return os_projection(b, i_set, p, false);
    }
    let q = orthonormal_basis(b)?;
    let mut current = i_set.clone();
    let mut extra = Vec::with_capacity(p);
    let mut degenerate = false;
    let mut rounds = 0;
    while extra.len() < p {
        let chunk = (p - extra.len()).min(k);
        let step = os_projection(&q, &current, chunk, true)?;
        degenerate |= step.degenerate;
        rounds += 1;
        extra.extend(step.extra.iter());
        current = current.union(&step.extra)?;
    }
    Ok(Oversampled {
        extra: IndexSet::new(extra, n)?,
        degenerate,
        rounds,
        target_met: true,
    })
}

/// `σ_min(Q(rows,:))`, the quantity every mode tries to increase.
pub fn block_sigma_min(q: &DenseMatrix, rows: &[usize]) -> Result<f64> {
    let block = q.select_rows(rows);
    let svd = thin_svd(&block)?;
    if block.rows() < block.cols() {
        return Ok(0.0);
    }
    Ok(svd.sigma_min())
}
