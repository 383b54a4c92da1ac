//! Seeded test matrices and matrix file formats.
//!
//! Every generator is a pure function of its parameters and seed. Random
//! draws are taken from one stream per matrix in a fixed order, listed on
//! each generator.

mod io;

pub use io::{
    load_matrix, load_matrix_market, load_raw, read_matrix_market, read_raw, save_matrix_market,
    save_raw, write_matrix_market, write_raw, RAW_MAGIC,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{CurError, Result};
use crate::kernels::orthonormal_basis;
use crate::matrix::DenseMatrix;
use crate::rng::{seeded, standard_normal_matrix, unit_uniform};

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(CurError::Empty { rows: m, cols: n });
    }
    Ok(())
}

/// `G₁·G₂` with `G₁` (`m x r`, drawn first) and `G₂` (`r x n`) standard
/// Gaussian.
pub fn gen_lowrank_gaussian(m: usize, n: usize, r: usize, seed: u64) -> Result<DenseMatrix> {
    check_dims(m, n)?;
    if r == 0 || r > m.min(n) {
        return Err(CurError::param(
            "r",
            format!("{r} must be in 1..={}", m.min(n)),
        ));
    }
    let mut rng = seeded(seed);
    let g1 = standard_normal_matrix(m, r, &mut rng);
    let g2 = standard_normal_matrix(r, n, &mut rng);
    Ok(g1.mul_unchecked(&g2))
}

/// `[[scale·G₁₁, G₁₂], [G₂₁, 0]]` with a `small x small` leading block.
/// Draw order: `G₁₁`, `G₁₂`, `G₂₁`, each row-major.
pub fn gen_block_adversarial(
    m: usize,
    n: usize,
    small: usize,
    scale: f64,
    seed: u64,
) -> Result<DenseMatrix> {
    check_dims(m, n)?;
    if small == 0 || small >= m.min(n) {
        return Err(CurError::param(
            "small",
            format!("{small} must be in 1..{}", m.min(n)),
        ));
    }
    if !scale.is_finite() {
        return Err(CurError::param("scale", "must be finite"));
    }
    let mut rng = seeded(seed);
    let g11 = standard_normal_matrix(small, small, &mut rng);
    let g12 = standard_normal_matrix(small, n - small, &mut rng);
    let g21 = standard_normal_matrix(m - small, small, &mut rng);
    Ok(DenseMatrix::from_fn(m, n, |i, j| {
        match (i < small, j < small) {
            (true, true) => scale * g11.get(i, j),
            (true, false) => g12.get(i, j - small),
            (false, true) => g21.get(i - small, j),
            (false, false) => 0.0,
        }
    }))
}

/// The weight profile `2/j` for `j ≤ 50` and `1/j` afterwards (1-based).
pub fn snn_default_weights(r: usize) -> Vec<f64> {
    (1..=r)
        .map(|j| {
            if j <= 50 {
                2.0 / j as f64
            } else {
                1.0 / j as f64
            }
        })
        .collect()
}

pub const SNN_DEFAULT_DENSITY: f64 = 0.025;

/// `Σⱼ wⱼ xⱼ yⱼᵀ` with sparse non-negative `xⱼ ∈ ℝᵐ`, `yⱼ ∈ ℝⁿ`.
///
/// Each entry is nonzero with probability `density` and then uniform on
/// `[0, 1)`. Draw order: for each `j`, the entries of `xⱼ` then of `yⱼ`;
/// per entry one uniform for the coin and, if it lands, one for the value.
pub fn gen_snn(
    m: usize,
    n: usize,
    r: usize,
    density: f64,
    weights: &[f64],
    seed: u64,
) -> Result<DenseMatrix> {
    check_dims(m, n)?;
    if !(density > 0.0 && density <= 1.0) {
        return Err(CurError::param(
            "density",
            format!("{density} must lie in (0, 1]"),
        ));
    }
    if weights.len() != r {
        return Err(CurError::param(
            "weights",
            format!("{} weights for r = {r}", weights.len()),
        ));
    }
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite()))
        || weights.windows(2).any(|w| w[1] > w[0])
    {
        return Err(CurError::param(
            "weights",
            "must be positive and non-increasing",
        ));
    }
    let mut rng = seeded(seed);
    let mut x = DenseMatrix::zeros(m, r);
    let mut yt = DenseMatrix::zeros(r, n);
    let draw = |rng: &mut _| {
        if unit_uniform(rng) < density {
            unit_uniform(rng)
        } else {
            0.0
        }
    };
    for (j, &w) in weights.iter().enumerate() {
        for i in 0..m {
            x.set(i, j, w * draw(&mut rng));
        }
        for i in 0..n {
            yt.set(j, i, draw(&mut rng));
        }
    }
    Ok(x.mul_unchecked(&yt))
}

/// `[[ε, 1], [1, 0]]`.
pub fn gen_two_by_two(epsilon: f64) -> Result<DenseMatrix> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(CurError::param(
            "epsilon",
            format!("{epsilon} must lie in (0, 1)"),
        ));
    }
    Ok(DenseMatrix::from_rows(&[&[epsilon, 1.0], &[1.0, 0.0]]))
}

/// `U·diag(1, ratio, ratio², …)·Vᵀ` with `U`, `V` the orthonormal factors of
/// Gaussian `m x r` and `n x r` matrices (drawn in that order),
/// `r = min(m, n)`.
pub fn gen_geometric_spectrum(m: usize, n: usize, ratio: f64, seed: u64) -> Result<DenseMatrix> {
    check_dims(m, n)?;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CurError::param(
            "ratio",
            format!("{ratio} must lie in (0, 1)"),
        ));
    }
    let r = m.min(n);
    let mut rng = seeded(seed);
    let u = orthonormal_basis(&standard_normal_matrix(m, r, &mut rng))?;
    let v = orthonormal_basis(&standard_normal_matrix(n, r, &mut rng))?;
    let mut us = u;
    let scales: Vec<f64> = std::iter::successors(Some(1.0), |s| Some(s * ratio))
        .take(r)
        .collect();
    for i in 0..m {
        for (x, s) in us.row_mut(i).iter_mut().zip(&scales) {
            *x *= s;
        }
    }
    Ok(us.mul_unchecked(&v.transpose()))
}

/// Generator families and their parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorKind {
    LowrankGaussian {
        m: usize,
        n: usize,
        r: usize,
    },
    BlockAdversarial {
        m: usize,
        n: usize,
        small: usize,
        scale: f64,
    },
    Snn {
        m: usize,
        n: usize,
        r: usize,
        density: f64,
    },
    TwoByTwo {
        epsilon: f64,
    },
    GeometricSpectrum {
        m: usize,
        n: usize,
        ratio: f64,
    },
}

/// A generator plus its seed. Parses from and prints as compact strings:
///
/// ```text
/// lowrank:300x300:r20
/// block:200x200:s20:1e-10
/// snn:5000x300            (r = n, density 0.025, default weights)
/// snn:5000x300:r100:d0.05
/// two_by_two:1e-8
/// geometric:60x60:0.3
/// ```
///
/// A trailing `:seedN` sets the seed (default 0).
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind) -> Self {
        GeneratorSpec { kind, seed: 0 }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GeneratorSpec {
            kind: self.kind.clone(),
            seed,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self.kind {
            GeneratorKind::LowrankGaussian { m, n, .. }
            | GeneratorKind::BlockAdversarial { m, n, .. }
            | GeneratorKind::Snn { m, n, .. }
            | GeneratorKind::GeometricSpectrum { m, n, .. } => (m, n),
            GeneratorKind::TwoByTwo { .. } => (2, 2),
        }
    }

    pub fn family(&self) -> &'static str {
        match self.kind {
            GeneratorKind::LowrankGaussian { .. } => "lowrank",
            GeneratorKind::BlockAdversarial { .. } => "block",
            GeneratorKind::Snn { .. } => "snn",
            GeneratorKind::TwoByTwo { .. } => "two_by_two",
            GeneratorKind::GeometricSpectrum { .. } => "geometric",
        }
    }

    pub fn generate(&self) -> Result<DenseMatrix> {
        let seed = self.seed;
        match self.kind {
            GeneratorKind::LowrankGaussian { m, n, r } => gen_lowrank_gaussian(m, n, r, seed),
            GeneratorKind::BlockAdversarial { m, n, small, scale } => {
                gen_block_adversarial(m, n, small, scale, seed)
            }
            GeneratorKind::Snn { m, n, r, density } => {
                gen_snn(m, n, r, density, &snn_default_weights(r), seed)
            }
            GeneratorKind::TwoByTwo { epsilon } => gen_two_by_two(epsilon),
            GeneratorKind::GeometricSpectrum { m, n, ratio } => {
                gen_geometric_spectrum(m, n, ratio, seed)
            }
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GeneratorKind::LowrankGaussian { m, n, r } => write!(f, "lowrank:{m}x{n}:r{r}")?,
            GeneratorKind::BlockAdversarial { m, n, small, scale } => {
                write!(f, "block:{m}x{n}:s{small}:{scale:e}")?
            }
            GeneratorKind::Snn { m, n, r, density } => write!(f, "snn:{m}x{n}:r{r}:d{density}")?,
            GeneratorKind::TwoByTwo { epsilon } => write!(f, "two_by_two:{epsilon:e}")?,
            GeneratorKind::GeometricSpectrum { m, n, ratio } => {
                write!(f, "geometric:{m}x{n}:{ratio}")?
            }
        }
        if self.seed != 0 {
            write!(f, ":seed{}", self.seed)?;
        }
        Ok(())
    }
}

fn spec_err(msg: impl Into<String>) -> CurError {
    CurError::param("generator", msg)
}

fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let (m, n) = s
        .split_once('x')
        .ok_or_else(|| spec_err(format!("expected MxN, got `{s}`")))?;
    let parse = |v: &str| {
        v.parse::<usize>()
            .map_err(|_| spec_err(format!("bad dimension `{v}`")))
    };
    Ok((parse(m)?, parse(n)?))
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| spec_err(format!("bad {what} `{s}`")))
}

fn prefixed<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    s.strip_prefix(prefix)
}

impl FromStr for GeneratorSpec {
    type Err = CurError;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts: Vec<&str> = s.trim().split(':').collect();
        let mut seed = 0;
        if let Some(last) = parts.last() {
            if let Some(v) = prefixed(last, "seed") {
                seed = parse_num(v, "seed")?;
                parts.pop();
            }
        }
        let family = parts.first().copied().unwrap_or("");
        let args = &parts[1.min(parts.len())..];
        let kind = match family {
            "lowrank" | "lowrank_gaussian" => {
                let [dims, r] = args else {
                    return Err(spec_err("usage: lowrank:MxN:rR"));
                };
                let (m, n) = parse_dims(dims)?;
                let r = prefixed(r, "r").ok_or_else(|| spec_err("rank needs an `r` prefix"))?;
                GeneratorKind::LowrankGaussian {
                    m,
                    n,
                    r: parse_num(r, "rank")?,
                }
            }
            "block" | "block_adversarial" => {
                let [dims, small, scale] = args else {
                    return Err(spec_err("usage: block:MxN:sSMALL:SCALE"));
                };
                let (m, n) = parse_dims(dims)?;
                let small = prefixed(small, "s")
                    .ok_or_else(|| spec_err("block size needs an `s` prefix"))?;
                GeneratorKind::BlockAdversarial {
                    m,
                    n,
                    small: parse_num(small, "block size")?,
                    scale: parse_num(scale, "scale")?,
                }
            }
            "snn" => {
                let Some((dims, rest)) = args.split_first() else {
                    return Err(spec_err("usage: snn:MxN[:rR][:dDENSITY]"));
                };
                let (m, n) = parse_dims(dims)?;
                let mut r = n;
                let mut density = SNN_DEFAULT_DENSITY;
                for opt in rest {
                    if let Some(v) = prefixed(opt, "r") {
                        r = parse_num(v, "rank")?;
                    } else if let Some(v) = prefixed(opt, "d") {
                        density = parse_num(v, "density")?;
                    } else {
                        return Err(spec_err(format!("unknown snn option `{opt}`")));
                    }
                }
                GeneratorKind::Snn { m, n, r, density }
            }
            "two_by_two" | "2x2" => {
                let [eps] = args else {
                    return Err(spec_err("usage: two_by_two:EPSILON"));
                };
                GeneratorKind::TwoByTwo {
                    epsilon: parse_num(eps, "epsilon")?,
                }
            }
            "geometric" | "geometric_spectrum" => {
                let [dims, ratio] = args else {
                    return Err(spec_err("usage: geometric:MxN:RATIO"));
                };
                let (m, n) = parse_dims(dims)?;
                GeneratorKind::GeometricSpectrum {
                    m,
                    n,
                    ratio: parse_num(ratio, "ratio")?,
                }
            }
            other => return Err(spec_err(format!("unknown generator `{other}`"))),
        };
        Ok(GeneratorSpec { kind, seed })
    }
}
