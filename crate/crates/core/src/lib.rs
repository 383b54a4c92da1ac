//! CUR low-rank approximation with numerically stable cores.
//!
//! The crate covers the whole pipeline: choosing row and column indices
//! ([`selection`]), enlarging the row set to improve conditioning
//! ([`oversampling`]), forming the decomposition in one of several orderings
//! ([`cur`]), and certifying the result with a posteriori error bounds
//! ([`bounds`]). [`testbed`] generates the synthetic matrices used by the
//! experiments and reads Matrix Market files.

pub mod bounds;
pub mod cur;
pub mod error;
pub mod kernels;
pub mod matrix;
pub mod norms;
pub mod oversampling;
pub mod rng;
pub mod selection;
pub mod testbed;

pub use error::{CurError, Result};
pub use matrix::{DenseMatrix, IndexSet};
