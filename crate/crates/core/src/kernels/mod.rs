//! Dense linear-algebra primitives: Householder and column-pivoted QR, thin
//! SVD with ε-partition, truncated pseudoinverse application, the stable
//! rank-deficient underdetermined solver, Gaussian sketching and leverage
//! scores.

pub mod leverage;
pub mod qr;
pub mod sketch;
pub mod solve;
pub mod svd;

pub use leverage::{leverage_scores, orthonormality_deviation};
pub use qr::{cpqr, orthonormal_basis, thin_qr, PivotedQR, ThinQR};
pub use sketch::{gaussian_embedding, gaussian_sketch};
pub use solve::{stable_underdetermined_solve, SolveStatus, StableSolution, UnderdeterminedSolver};
pub use svd::{
    eps_partition, eps_pinv_apply, min_singular_value, singular_values, thin_svd, EpsPartition,
    ThinSVD, Threshold, DEFAULT_EPS,
};
