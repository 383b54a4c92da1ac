//! One grid point: select, oversample, decompose, measure.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use curkit::bounds::{curba_bound, curca_bound, BoundReport};
use curkit::cur::{decompose, relative_error, tsvd_error_from_sigma, CoreMode, CurFactors};
use curkit::kernels::{gaussian_sketch, singular_values, thin_svd, Threshold};
use curkit::norms::Norm;
use curkit::oversampling::{os_iterated, OversampleMode};
use curkit::selection::{select, Strategy};
use curkit::testbed::{load_matrix, GeneratorSpec};
use curkit::{CurError, DenseMatrix, IndexSet};

#[derive(Clone, Debug)]
pub enum Source {
    Generator(GeneratorSpec),
    File(PathBuf),
}

impl Source {
    /// Generated matrices use `spec seed + run seed`; files ignore the seed.
    pub fn load(&self, seed: u64) -> Result<DenseMatrix, CurError> {
        match self {
            Source::Generator(g) => g.with_seed(g.seed.wrapping_add(seed)).generate(),
            Source::File(p) => load_matrix(p),
        }
    }

    /// Known without generating; `None` for files.
    pub fn dims(&self) -> Option<(usize, usize)> {
        match self {
            Source::Generator(g) => Some(g.dims()),
            Source::File(_) => None,
        }
    }
}

/// Which index set receives the extra indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Rows,
    Cols,
    Both,
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rows" => Ok(Side::Rows),
            "cols" | "columns" => Ok(Side::Cols),
            "both" => Ok(Side::Both),
            other => Err(format!("unknown side `{other}` (rows, cols, both)")),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Rows => "rows",
            Side::Cols => "cols",
            Side::Both => "both",
        })
    }
}

/// Row-space approximator handed to the bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XSource {
    /// The selection's own sketch, or a fresh `k`-row Gaussian sketch.
    Sketch,
    /// Dominant right singular vectors (optimal residual).
    Svd,
}

impl FromStr for XSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sketch" => Ok(XSource::Sketch),
            "svd" => Ok(XSource::Svd),
            other => Err(format!(
                "unknown row-space approximator `{other}` (sketch, svd)"
            )),
        }
    }
}

/// Settings shared by every point of a run.
#[derive(Clone, Debug)]
pub struct Settings {
    pub eps: Threshold,
    pub norm: Norm,
    pub x_source: XSource,
    pub timing: bool,
}

/// A loaded matrix with what every point needs from it.
pub struct Instance {
    pub seed: u64,
    pub a: DenseMatrix,
    pub sigma: Vec<f64>,
    /// `(U, V)` of the thin SVD when the bounds use singular vectors.
    pub vectors: Option<(DenseMatrix, DenseMatrix)>,
}

impl Instance {
    pub fn prepare(source: &Source, seed: u64, x_source: XSource) -> Result<Self, CurError> {
        let a = source.load(seed)?;
        let (sigma, vectors) = match x_source {
            XSource::Sketch => (singular_values(&a)?, None),
            XSource::Svd => {
                let svd = thin_svd(&a)?;
                (svd.sigma, Some((svd.w, svd.v)))
            }
        };
        Ok(Instance {
            seed,
            a,
            sigma,
            vectors,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Point {
    pub k: usize,
    pub p: usize,
    pub strategy: Strategy,
    pub oversample: OversampleMode,
    pub side: Side,
    pub mode: CoreMode,
}

impl Point {
    pub fn label(&self) -> String {
        if self.p == 0 {
            return self.strategy.name().to_string();
        }
        match self.side {
            Side::Rows => format!("{}+{}", self.strategy, self.oversample.name()),
            side => format!("{}+{}@{side}", self.strategy, self.oversample.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub seed: u64,
    pub k: usize,
    pub p: usize,
    pub mode: String,
    pub strategy: String,
    pub relative_error: f64,
    pub tsvd_error: f64,
    pub bound_value: f64,
    pub kappa: f64,
    pub sigma_min_core: f64,
    pub wall_time_ms: f64,
    pub status: String,
}

pub const HEADER: [&str; 12] = [
    "seed",
    "k",
    "p",
    "mode",
    "strategy",
    "relative_error",
    "tsvd_error",
    "bound_value",
    "kappa",
    "sigma_min_core",
    "wall_time_ms",
    "status",
];

impl ResultRow {
    fn failed(inst: &Instance, pt: &Point, norm: Norm, err: impl fmt::Display) -> Self {
        ResultRow {
            seed: inst.seed,
            k: pt.k,
            p: pt.p,
            mode: pt.mode.name().to_string(),
            strategy: pt.label(),
            relative_error: f64::NAN,
            tsvd_error: tsvd_error_from_sigma(&inst.sigma, pt.k, norm).unwrap_or(f64::NAN),
            bound_value: f64::NAN,
            kappa: f64::NAN,
            sigma_min_core: f64::NAN,
            wall_time_ms: 0.0,
            status: format!("error: {err}"),
        }
    }

    /// Floats use `{:?}`, the shortest string that parses back to the same
    /// value, so identical runs give identical bytes.
    pub fn record(&self) -> [String; 12] {
        [
            self.seed.to_string(),
            self.k.to_string(),
            self.p.to_string(),
            self.mode.clone(),
            self.strategy.clone(),
            format!("{:?}", self.relative_error),
            format!("{:?}", self.tsvd_error),
            format!("{:?}", self.bound_value),
            format!("{:?}", self.kappa),
            format!("{:?}", self.sigma_min_core),
            format!("{:?}", self.wall_time_ms),
            self.status.clone(),
        ]
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

struct Chosen {
    rows: IndexSet,
    cols: IndexSet,
    base_rows: IndexSet,
    base_cols: IndexSet,
    sketch: Option<DenseMatrix>,
}

fn choose(inst: &Instance, pt: &Point) -> Result<Chosen, CurError> {
    let a = &inst.a;
    let sel = select(a, pt.k, pt.strategy, inst.seed)?;
    let (i, j) = (sel.row_indices, sel.col_indices);
    let mut rows = i.clone();
    let mut cols = j.clone();
    if pt.p > 0 {
        if matches!(pt.side, Side::Rows | Side::Both) {
            let c = a.select_cols(j.as_slice());
            rows = os_iterated(&c, &i, pt.p, pt.oversample)?.merged(&i)?;
        }
        if matches!(pt.side, Side::Cols | Side::Both) {
            let rt = a.select_rows(i.as_slice()).transpose();
            cols = os_iterated(&rt, &j, pt.p, pt.oversample)?.merged(&j)?;
        }
    }
    Ok(Chosen {
        rows,
        cols,
        base_rows: i,
        base_cols: j,
        sketch: sel.row_space_approx,
    })
}

/// `k`-row approximator of the row space of `a` (or of its column space
/// when `transposed`).
fn approximator(
    inst: &Instance,
    k: usize,
    transposed: bool,
    sketch: Option<&DenseMatrix>,
    src: XSource,
) -> Result<DenseMatrix, CurError> {
    match (src, &inst.vectors) {
        (XSource::Svd, Some((u, v))) => {
            Ok(if transposed { u } else { v }.leading_cols(k).transpose())
        }
        _ => match (transposed, sketch) {
            (false, Some(x)) => Ok(x.clone()),
            (false, None) => gaussian_sketch(&inst.a, k, inst.seed),
            (true, _) => gaussian_sketch(&inst.a.transpose(), k, inst.seed),
        },
    }
}

fn bound(
    inst: &Instance,
    pt: &Point,
    ch: &Chosen,
    eps: f64,
    settings: &Settings,
) -> Result<Option<BoundReport>, CurError> {
    let a = &inst.a;
    let eps_b = if pt.mode.uses_eps() { eps } else { 0.0 };
    let x_src = settings.x_source;
    if pt.mode == CoreMode::CurbaStable {
        let x = approximator(inst, pt.k, false, ch.sketch.as_ref(), x_src)?;
        return curba_bound(a, &ch.rows, &ch.cols, &x, None, settings.norm).map(Some);
    }
    match (
        ch.rows.len() > ch.base_rows.len(),
        ch.cols.len() > ch.base_cols.len(),
    ) {
        // extra indices on both sides: no certificate of this form
        (true, true) => Ok(None),
        (_, false) => {
            let x = approximator(inst, pt.k, false, ch.sketch.as_ref(), x_src)?;
            curca_bound(a, &ch.rows, &ch.cols, &x, eps_b, settings.norm).map(Some)
        }
        (false, true) => {
            let y = approximator(inst, pt.k, true, None, x_src)?;
            curca_bound(&a.transpose(), &ch.cols, &ch.rows, &y, eps_b, settings.norm).map(Some)
        }
    }
}

pub fn run_point(inst: &Instance, pt: &Point, settings: &Settings) -> ResultRow {
    let start = Instant::now();
    let chosen = match choose(inst, pt) {
        Ok(c) => c,
        Err(e) => return ResultRow::failed(inst, pt, settings.norm, e),
    };
    let core = inst
        .a
        .select(chosen.rows.as_slice(), chosen.cols.as_slice());
    let core_sigma = match singular_values(&core) {
        Ok(s) => s,
        Err(e) => return ResultRow::failed(inst, pt, settings.norm, e),
    };
    let eps = settings.eps.resolve(core_sigma[0]);
    let factors: CurFactors = match decompose(&inst.a, &chosen.rows, &chosen.cols, pt.mode, eps) {
        Ok(f) => f,
        Err(e) => return ResultRow::failed(inst, pt, settings.norm, e),
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;

    let rel = relative_error(&inst.a, &factors, settings.norm).unwrap_or(f64::NAN);
    let tsvd = tsvd_error_from_sigma(&inst.sigma, pt.k, settings.norm).unwrap_or(f64::NAN);
    let (bound_value, kappa, mut status) = match bound(inst, pt, &chosen, eps, settings) {
        Ok(Some(b)) => (b.bound_value, b.kappa, factors.status.to_string()),
        Ok(None) => (f64::NAN, f64::NAN, factors.status.to_string()),
        Err(e) => (
            f64::NAN,
            f64::NAN,
            format!("{}; bound failed: {e}", factors.status),
        ),
    };
    if rel.is_nan() && status == "ok" {
        status = "error: non-finite reconstruction".into();
    }
    ResultRow {
        seed: inst.seed,
        k: pt.k,
        p: pt.p,
        mode: pt.mode.name().to_string(),
        strategy: pt.label(),
        relative_error: rel,
        tsvd_error: tsvd,
        bound_value,
        kappa,
        sigma_min_core: *core_sigma.last().unwrap(),
        wall_time_ms: if settings.timing { elapsed } else { 0.0 },
        status,
    }
}
