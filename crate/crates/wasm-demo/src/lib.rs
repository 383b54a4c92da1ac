//! Browser bindings for three small demos: the 2x2 explorer, error against
//! rank, and a comparison of oversampling methods.
//!
//! Every export returns a flat `Float64Array`; the layouts are documented
//! on the plain Rust functions the exports wrap.

use wasm_bindgen::prelude::*;

use curkit::cur::{decompose, reconstruct, relative_error, tsvd_error_from_sigma, CoreMode};
use curkit::kernels::{singular_values, DEFAULT_EPS};
use curkit::norms::Norm;
use curkit::oversampling::{os_iterated, OversampleMode};
use curkit::selection::{select, Strategy};
use curkit::testbed::{gen_two_by_two, GeneratorSpec};
use curkit::{DenseMatrix, IndexSet};

const FRO: Norm = Norm::Frobenius;

/// Largest matrix the demos will generate, in entries.
pub const MAX_ENTRIES: usize = 200_000;

fn generate(spec: &str, seed: u64) -> Result<DenseMatrix, String> {
    let g: GeneratorSpec = spec.parse().map_err(|e| format!("{e}"))?;
    let (m, n) = g.dims();
    if m.saturating_mul(n) > MAX_ENTRIES {
        return Err(format!(
            "{m}x{n} is too large for the demo (at most {MAX_ENTRIES} entries)"
        ));
    }
    g.with_seed(g.seed.wrapping_add(seed))
        .generate()
        .map_err(|e| e.to_string())
}

fn single(i: usize, universe: usize) -> Result<IndexSet, String> {
    IndexSet::new(vec![i], universe).map_err(|e| e.to_string())
}

/// Rank-1 CUR of `[[epsilon, 1], [1, 0]]` built from row `row` and column
/// `col`.
///
/// Layout: `A` row-major (4), the approximation row-major (4), the core
/// entry, the relative error, the best rank-1 relative error, then the row
/// and column picked by independent selection and by dependent selection
/// (4).
pub fn two_by_two(epsilon: f64, row: usize, col: usize) -> Result<Vec<f64>, String> {
    if row > 1 || col > 1 {
        return Err("row and col must be 0 or 1".into());
    }
    let a = gen_two_by_two(epsilon).map_err(|e| e.to_string())?;
    let f = decompose(
        &a,
        &single(row, 2)?,
        &single(col, 2)?,
        CoreMode::CurcaStable,
        0.0,
    )
    .map_err(|e| e.to_string())?;
    let approx = reconstruct(&f);
    let err = relative_error(&a, &f, FRO).map_err(|e| e.to_string())?;
    let sigma = singular_values(&a).map_err(|e| e.to_string())?;
    let tsvd = tsvd_error_from_sigma(&sigma, 1, FRO).map_err(|e| e.to_string())?;

    let mut out = Vec::with_capacity(15);
    for m in [&a, &approx] {
        for i in 0..2 {
            for j in 0..2 {
                out.push(m.get(i, j));
            }
        }
    }
    out.extend([a.get(row, col), err, tsvd]);
    for s in [Strategy::IndependentCpqr, Strategy::DependentCpqr] {
        let sel = select(&a, 1, s, 0).map_err(|e| e.to_string())?;
        out.push(sel.row_indices.as_slice()[0] as f64);
        out.push(sel.col_indices.as_slice()[0] as f64);
    }
    Ok(out)
}

/// Relative error of each core mode for `k = 1..=k_max`.
///
/// `modes` is comma-separated (`stable,explicit_pinv,naive,scurca`).
/// Layout: one record per `k` of `[k, tsvd, error per mode...]`. Failed
/// points are NaN.
pub fn error_sweep(spec: &str, k_max: usize, modes: &str, seed: u64) -> Result<Vec<f64>, String> {
    let modes: Vec<CoreMode> = modes
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e: curkit::CurError| e.to_string()))
        .collect::<Result<_, _>>()?;
    let a = generate(spec, seed)?;
    let (m, n) = a.shape();
    let k_max = k_max.min(m.min(n));
    let sigma = singular_values(&a).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(k_max * (2 + modes.len()));
    for k in 1..=k_max {
        out.push(k as f64);
        out.push(tsvd_error_from_sigma(&sigma, k, FRO).unwrap_or(f64::NAN));
        let sel = select(&a, k, Strategy::RandPivot, seed);
        for &mode in &modes {
            let err = sel.as_ref().ok().and_then(|s| {
                let f = decompose(&a, &s.row_indices, &s.col_indices, mode, DEFAULT_EPS).ok()?;
                relative_error(&a, &f, FRO).ok()
            });
            out.push(err.unwrap_or(f64::NAN));
        }
    }
    Ok(out)
}

/// Stable CUR error after adding `p` rows with each oversampling method.
///
/// Layout: `[tsvd, no oversampling, projection, leverage, greedy]`.
pub fn oversampling_compare(spec: &str, k: usize, p: usize, seed: u64) -> Result<Vec<f64>, String> {
    let a = generate(spec, seed)?;
    let (m, n) = a.shape();
    if k == 0 || k > m.min(n) || k + p > m {
        return Err(format!("need 1 <= k <= {} and k + p <= {m}", m.min(n)));
    }
    let sigma = singular_values(&a).map_err(|e| e.to_string())?;
    let sel = select(&a, k, Strategy::RandPivot, seed).map_err(|e| e.to_string())?;
    let (i, j) = (&sel.row_indices, &sel.col_indices);
    let c = a.select_cols(j.as_slice());
    let err = |rows: &IndexSet| -> Result<f64, String> {
        let f = decompose(&a, rows, j, CoreMode::CurcaStable, 0.0).map_err(|e| e.to_string())?;
        relative_error(&a, &f, FRO).map_err(|e| e.to_string())
    };
    let mut out = vec![
        tsvd_error_from_sigma(&sigma, k, FRO).map_err(|e| e.to_string())?,
        err(i)?,
    ];
    for mode in OversampleMode::ALL {
        let rows = os_iterated(&c, i, p, mode)
            .and_then(|o| o.merged(i))
            .map_err(|e| e.to_string())?;
        out.push(err(&rows)?);
    }
    Ok(out)
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = twoByTwo)]
pub fn two_by_two_js(epsilon: f64, row: usize, col: usize) -> Result<Vec<f64>, JsValue> {
    js(two_by_two(epsilon, row, col))
}

#[wasm_bindgen(js_name = errorSweep)]
pub fn error_sweep_js(
    spec: &str,
    k_max: usize,
    modes: &str,
    seed: u64,
) -> Result<Vec<f64>, JsValue> {
    js(error_sweep(spec, k_max, modes, seed))
}

#[wasm_bindgen(js_name = oversamplingCompare)]
pub fn oversampling_compare_js(
    spec: &str,
    k: usize,
    p: usize,
    seed: u64,
) -> Result<Vec<f64>, JsValue> {
    js(oversampling_compare(spec, k, p, seed))
}
