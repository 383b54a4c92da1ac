//! Grid expansion and parallel execution.

use rayon::prelude::*;

use curkit::cur::CoreMode;
use curkit::oversampling::OversampleMode;
use curkit::selection::Strategy;
use curkit::CurError;

use crate::grid::Amount;
use crate::pipeline::{run_point, Instance, Point, ResultRow, Settings, Side, Source};

/// Worker count from `CURKIT_THREADS`; unset, empty or 0 leaves the choice
/// to rayon.
pub fn thread_count() -> Result<usize, String> {
    match std::env::var("CURKIT_THREADS") {
        Err(_) => Ok(0),
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("CURKIT_THREADS must be a non-negative integer, got `{v}`")),
    }
}

pub struct SweepGrid {
    pub ks: Vec<usize>,
    pub amounts: Vec<Amount>,
    pub strategies: Vec<Strategy>,
    pub modes: Vec<CoreMode>,
    pub oversample: OversampleMode,
    pub side: Side,
}

fn resolved(amounts: &[Amount], k: usize) -> Vec<usize> {
    let mut ps: Vec<usize> = Vec::new();
    for a in amounts {
        let p = a.resolve(k);
        if !ps.contains(&p) {
            ps.push(p);
        }
    }
    ps
}

impl SweepGrid {
    /// Order within a seed: k, strategy, p, mode.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for &k in &self.ks {
            for &strategy in &self.strategies {
                for p in resolved(&self.amounts, k) {
                    for &mode in &self.modes {
                        out.push(Point {
                            k,
                            p,
                            strategy,
                            oversample: self.oversample,
                            side: self.side,
                            mode,
                        });
                    }
                }
            }
        }
        out
    }
}

pub struct CompareGrid {
    pub ks: Vec<usize>,
    pub amounts: Vec<Amount>,
    pub oversample: Vec<OversampleMode>,
    pub strategy: Strategy,
    pub mode: CoreMode,
    pub side: Side,
}

impl CompareGrid {
    /// Per k: one `p = 0` baseline, then every oversampling mode over the
    /// positive amounts.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for &k in &self.ks {
            let ps = resolved(&self.amounts, k);
            let base = |p, oversample| Point {
                k,
                p,
                strategy: self.strategy,
                oversample,
                side: self.side,
                mode: self.mode,
            };
            if ps.contains(&0) {
                out.push(base(0, self.oversample[0]));
            }
            for &os in &self.oversample {
                for &p in ps.iter().filter(|&&p| p > 0) {
                    out.push(base(p, os));
                }
            }
        }
        out
    }
}

/// Checks every point against the matrix size before anything runs.
pub fn validate(points: &[Point], dims: (usize, usize)) -> Result<(), String> {
    let (m, n) = dims;
    for pt in points {
        if pt.k == 0 || pt.k > m.min(n) {
            return Err(format!(
                "k = {} must be in 1..={} for a {m}x{n} matrix",
                pt.k,
                m.min(n)
            ));
        }
        let rows_extra = if matches!(pt.side, Side::Rows | Side::Both) {
            pt.p
        } else {
            0
        };
        let cols_extra = if matches!(pt.side, Side::Cols | Side::Both) {
            pt.p
        } else {
            0
        };
        if pt.k + rows_extra > m || pt.k + cols_extra > n {
            return Err(format!(
                "k = {} with p = {} needs more indices than the {m}x{n} matrix has",
                pt.k, pt.p
            ));
        }
    }
    Ok(())
}

pub fn source_dims(source: &Source) -> Result<(usize, usize), CurError> {
    match source.dims() {
        Some(d) => Ok(d),
        None => Ok(source.load(0)?.shape()),
    }
}

/// Rows come back in grid order (seed, then point order) whatever order the
/// workers finish in.
pub fn run(
    source: &Source,
    seeds: &[u64],
    points: &[Point],
    settings: &Settings,
) -> Result<Vec<ResultRow>, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| {
        if points.is_empty() {
            return Ok(Vec::new());
        }
        let instances = seeds
            .par_iter()
            .map(|&s| Instance::prepare(source, s, settings.x_source))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("loading the matrix: {e}"))?;
        let jobs: Vec<(usize, usize)> = (0..instances.len())
            .flat_map(|s| (0..points.len()).map(move |p| (s, p)))
            .collect();
        Ok(jobs
            .par_iter()
            .map(|&(s, p)| run_point(&instances[s], &points[p], settings))
            .collect())
    })
}
