//! Linear-algebra kernels shared by every pipeline: dense and CSR matrices,
//! matrix-free operators, lean SVD / orthonormal bases, LSQR with discrepancy
//! stopping and conjugate gradients.

mod dense;
mod factor;
mod io;
mod operator;
mod solvers;
mod sparse;

pub use dense::DenseMatrix;
pub use factor::{lean_svd, orthonormal_basis, BasisMethod, LeanSvd, DEFAULT_RANK_TOL};
pub use io::{
    atomic_write, read_mrd1, read_mrd1_from, read_text_matrix, write_mrd1, write_mrd1_to,
    write_text_matrix,
};
pub use operator::{
    adjoint_consistency, ComposedOperator, FnOperator, LinearOperator, ScaledOperator,
};
pub use solvers::{cg_spd, lsqr_morozov, sparse_spd_solve, CgResult, LsqrResult, StopReason};
pub use sparse::SparseMatrix;

/// Euclidean norm of a slice.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
