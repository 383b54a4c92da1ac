//! Self-checks over seeded instances: exact recovery, bound validity,
//! oversampling monotonicity, agreement of the two SCURCA routes and the
//! SCURCA degradation allowance.

use rayon::prelude::*;

use curkit::bounds::{condition_number_curca, curba_bound, curca_bound};
use curkit::cur::{
    absolute_error, curba_stable, curca_stable, decompose, relative_error, scurca_factored,
    scurca_rowwise, CoreMode,
};
use curkit::kernels::{cpqr, orthonormal_basis, DEFAULT_EPS};
use curkit::norms::Norm;
use curkit::oversampling::{block_sigma_min, os_iterated, OversampleMode};
use curkit::rng::{seeded, standard_normal_matrix};
use curkit::selection::rand_pivot;
use curkit::testbed::{gen_geometric_spectrum, gen_lowrank_gaussian};
use curkit::{CurError, DenseMatrix};

const FRO: Norm = Norm::Frobenius;

pub struct Options {
    pub seeds: u64,
    pub eps: f64,
}

impl Options {
    pub fn new(quick: bool, eps: f64) -> Result<Self, String> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(format!("eps must be finite and >= 0, got {eps}"));
        }
        Ok(Options {
            seeds: if quick { 5 } else { 25 },
            eps,
        })
    }

    /// The row-by-row route needs `eps > 0`; a zero `eps` falls back to
    /// the library default there.
    fn rowwise_eps(&self) -> f64 {
        if self.eps > 0.0 {
            self.eps
        } else {
            DEFAULT_EPS
        }
    }
}

pub struct Check {
    pub name: &'static str,
    pub instances: usize,
    pub failing_seeds: Vec<u64>,
    pub errors: Vec<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failing_seeds.is_empty() && self.errors.is_empty()
    }
}

type Probe = fn(u64, &Options) -> Result<bool, CurError>;

fn run_check(name: &'static str, opts: &Options, probe: Probe) -> Check {
    let results: Vec<(u64, Result<bool, CurError>)> = (0..opts.seeds)
        .into_par_iter()
        .map(|s| (s, probe(s, opts)))
        .collect();
    let mut check = Check {
        name,
        instances: results.len(),
        failing_seeds: Vec::new(),
        errors: Vec::new(),
    };
    for (seed, r) in results {
        match r {
            Ok(true) => {}
            Ok(false) => check.failing_seeds.push(seed),
            Err(e) => {
                check.failing_seeds.push(seed);
                check.errors.push(format!("seed {seed}: {e}"));
            }
        }
    }
    check
}

fn noisy_lowrank(
    seed: u64,
    m: usize,
    n: usize,
    r: usize,
    noise: f64,
) -> Result<DenseMatrix, CurError> {
    let a = gen_lowrank_gaussian(m, n, r, seed)?;
    a.sub(&standard_normal_matrix(m, n, &mut seeded(seed ^ 0x5eed)).scaled(noise))
}

fn exact_recovery(seed: u64, opts: &Options) -> Result<bool, CurError> {
    let k = [3, 8, 15][(seed % 3) as usize];
    let a = gen_lowrank_gaussian(80, 60, k, seed)?;
    let sel = rand_pivot(&a, k, seed)?;
    for mode in CoreMode::ALL {
        let eps = if mode == CoreMode::ScurcaRowwise {
            opts.rowwise_eps()
        } else {
            opts.eps
        };
        let f = decompose(&a, &sel.row_indices, &sel.col_indices, mode, eps)?;
        if relative_error(&a, &f, FRO)? > 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn bound_validity(seed: u64, _: &Options) -> Result<bool, CurError> {
    let a = if seed % 2 == 0 {
        gen_geometric_spectrum(70, 50, 0.85, seed)?
    } else {
        noisy_lowrank(seed, 70, 50, 12, 1e-3)?
    };
    let k = [5, 10][(seed / 2 % 2) as usize];
    let sel = rand_pivot(&a, k, seed)?;
    let x = sel
        .row_space_approx
        .clone()
        .expect("rand_pivot returns its sketch");
    let j = &sel.col_indices;
    let c = a.select_cols(j.as_slice());
    let i_star = os_iterated(&c, &sel.row_indices, 5, OversampleMode::Projection)?
        .merged(&sel.row_indices)?;
    let eps = 1e-6 * a.frobenius_norm();
    let pairs = [
        (
            absolute_error(&a, &curca_stable(&a, &i_star, j)?, FRO)?,
            curca_bound(&a, &i_star, j, &x, 0.0, FRO)?,
        ),
        (
            absolute_error(&a, &scurca_factored(&a, &i_star, j, eps)?, FRO)?,
            curca_bound(&a, &i_star, j, &x, eps, FRO)?,
        ),
        (
            absolute_error(&a, &curba_stable(&a, &i_star, j)?, FRO)?,
            curba_bound(&a, &i_star, j, &x, None, FRO)?,
        ),
    ];
    Ok(pairs.iter().all(|(err, b)| b.bound_value >= *err))
}

fn monotonicity(seed: u64, _: &Options) -> Result<bool, CurError> {
    let q = orthonormal_basis(&standard_normal_matrix(40, 6, &mut seeded(seed)))?;
    let i = cpqr(&q.transpose(), 6)?.pivots;
    let before = block_sigma_min(&q, i.as_slice())?;
    for mode in OversampleMode::ALL {
        for p in [1, 3, 6, 12] {
            let rows = os_iterated(&q, &i, p, mode)?.merged(&i)?;
            if block_sigma_min(&q, rows.as_slice())? < before {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn scurca_agreement(seed: u64, opts: &Options) -> Result<bool, CurError> {
    let a = noisy_lowrank(seed, 60, 50, 8, 1e-3)?;
    let sel = rand_pivot(&a, 8, seed)?;
    let (i, j) = (&sel.row_indices, &sel.col_indices);
    let eps = opts.rowwise_eps();
    let fact = relative_error(&a, &scurca_factored(&a, i, j, eps)?, FRO)?;
    let row = relative_error(&a, &scurca_rowwise(&a, i, j, eps)?, FRO)?;
    Ok((fact - row).abs() <= 1e-10 * fact.max(row))
}

fn scurca_degradation(seed: u64, opts: &Options) -> Result<bool, CurError> {
    let a = gen_geometric_spectrum(60, 50, 0.7, seed)?;
    let k = 10 + (seed % 3) as usize * 5;
    let sel = rand_pivot(&a, k, seed)?;
    let (i, j) = (&sel.row_indices, &sel.col_indices);
    let x = sel
        .row_space_approx
        .clone()
        .expect("rand_pivot returns its sketch");
    let kappa = condition_number_curca(&a, i, j, &x)?;
    let stable = absolute_error(&a, &curca_stable(&a, i, j)?, FRO)?;
    let trunc = absolute_error(&a, &scurca_factored(&a, i, j, opts.eps)?, FRO)?;
    let allowance = kappa * (k as f64).sqrt() * opts.eps + 1e-12 * a.frobenius_norm();
    Ok(trunc - stable <= allowance)
}

pub fn run_all(opts: &Options) -> Vec<Check> {
    vec![
        run_check("exact_recovery", opts, exact_recovery),
        run_check("bound_validity", opts, bound_validity),
        run_check("oversampling_monotonicity", opts, monotonicity),
        run_check("scurca_rowwise_vs_factored", opts, scurca_agreement),
        run_check("scurca_degradation", opts, scurca_degradation),
    ]
}
