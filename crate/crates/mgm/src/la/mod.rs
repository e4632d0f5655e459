//! Minimal dense and sparse linear algebra used by the solver.

pub mod dense;
pub mod gauss_seidel;
pub mod perm;
pub mod sparse;

pub use dense::{lu_factor, qr_factor, DenseMatrix, LuFactors, QrFactors};
pub use gauss_seidel::{gs_sweep, gs_sweep_partial, SweepDirection};
pub use perm::{bandwidth, rcm_ordering, Permutation};
pub use sparse::{CsrMatrix, PermuteSide};

/// Euclidean norm.
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dot product in index order.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
