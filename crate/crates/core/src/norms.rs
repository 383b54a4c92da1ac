//! Frobenius and spectral norms of dense matrices and of implicitly
//! represented residual operators.
//!
//! Spectral norms come from power iteration on `MᵀM` (relative change below
//! 1e-8 or 200 iterations, whichever first) started from a fixed seeded
//! vector.

use std::fmt;
use std::str::FromStr;

use crate::error::CurError;
use crate::matrix::{norm2, DenseMatrix};
use crate::rng::{seeded, standard_normal};

pub const POWER_TOL: f64 = 1e-8;
pub const POWER_MAX_ITER: usize = 200;
const POWER_SEED: u64 = 0x5eed_c0de;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    Frobenius,
    Spectral,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::Frobenius => "frobenius",
            Norm::Spectral => "spectral",
        })
    }
}

impl FromStr for Norm {
    type Err = CurError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fro" | "frobenius" | "f" => Ok(Norm::Frobenius),
            "2" | "spectral" | "spec" => Ok(Norm::Spectral),
            other => Err(CurError::param("norm", format!("unknown norm `{other}`"))),
        }
    }
}

/// A matrix known only through products with vectors.
pub trait LinearOperator {
    fn shape(&self) -> (usize, usize);
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_t(&self, y: &[f64]) -> Vec<f64>;
}

impl LinearOperator for DenseMatrix {
    fn shape(&self) -> (usize, usize) {
        DenseMatrix::shape(self)
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x)
    }

    fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        self.t_matvec(y)
    }
}

/// `A − L·R` without forming `L·R`.
pub struct FactoredResidual<'a> {
    pub a: &'a DenseMatrix,
    pub left: &'a DenseMatrix,
    pub right: &'a DenseMatrix,
}

impl LinearOperator for FactoredResidual<'_> {
    fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.a.matvec(x);
        if self.left.cols() > 0 {
            let lr = self.left.matvec(&self.right.matvec(x));
            for (yi, v) in y.iter_mut().zip(lr) {
                *yi -= v;
            }
        }
        y
    }

    fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        let mut x = self.a.t_matvec(y);
        if self.left.cols() > 0 {
            let rl = self.right.t_matvec(&self.left.t_matvec(y));
            for (xi, v) in x.iter_mut().zip(rl) {
                *xi -= v;
            }
        }
        x
    }
}

/// Largest singular value by power iteration on `MᵀM`.
pub fn spectral_norm_power(op: &dyn LinearOperator) -> f64 {
    let (_, n) = op.shape();
    let mut rng = seeded(POWER_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|e| *e /= nv);
    let mut estimate = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let u = op.apply(&v);
        let sigma = norm2(&u);
        if sigma == 0.0 {
            return 0.0;
        }
        let mut w = op.apply_t(&u);
        let nw = norm2(&w);
        if nw == 0.0 {
            return sigma;
        }
        w.iter_mut().for_each(|e| *e /= nw);
        v = w;
        let converged = (sigma - estimate).abs() <= POWER_TOL * sigma;
        estimate = sigma;
        if converged {
            break;
        }
    }
    // One last product with the final iterate.
    estimate.max(norm2(&op.apply(&v)))
}

pub fn matrix_norm(m: &DenseMatrix, norm: Norm) -> f64 {
    match norm {
        Norm::Frobenius => m.frobenius_norm(),
        Norm::Spectral => spectral_norm_power(m),
    }
}

/// `‖A − L·R‖`; the Frobenius case accumulates row blocks so `L·R` is never
/// materialized whole.
pub fn factored_residual_norm(
    a: &DenseMatrix,
    left: &DenseMatrix,
    right: &DenseMatrix,
    norm: Norm,
) -> f64 {
    match norm {
        Norm::Frobenius => blocked_residual_frobenius(a, left, right),
        Norm::Spectral => spectral_norm_power(&FactoredResidual { a, left, right }),
    }
}

const ROW_BLOCK: usize = 64;

fn blocked_residual_frobenius(a: &DenseMatrix, left: &DenseMatrix, right: &DenseMatrix) -> f64 {
    let (m, n) = a.shape();
    let r = left.cols();
    // Scaled sum of squares, as in LAPACK's dlassq.
    let mut scale = 0.0_f64;
    let mut ssq = 1.0_f64;
    let mut block = vec![0.0; ROW_BLOCK * n];
    let mut start = 0;
    while start < m {
        let end = (start + ROW_BLOCK).min(m);
        for (bi, i) in (start..end).enumerate() {
            let out = &mut block[bi * n..(bi + 1) * n];
            out.copy_from_slice(a.row(i));
            for p in 0..r {
                let l = left.get(i, p);
                if l == 0.0 {
                    continue;
                }
                for (o, &rv) in out.iter_mut().zip(right.row(p)) {
                    *o -= l * rv;
                }
            }
        }
        for &v in &block[..(end - start) * n] {
            if v != 0.0 {
                let av = v.abs();
                if scale < av {
                    ssq = 1.0 + ssq * (scale / av) * (scale / av);
                    scale = av;
                } else {
                    ssq += (av / scale) * (av / scale);
                }
            }
        }
        start = end;
    }
    scale * ssq.sqrt()
}
