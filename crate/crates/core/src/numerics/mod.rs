//! Dense kernels: symmetric eigensolvers, determinants, the spectral matrix
//! exponential and log-space special functions.

mod det;
mod eigen;
mod metzler;
mod special;

pub use det::determinant;
pub use eigen::{
    exp_action, hermitian_eigenvalues, hermitian_function, sym_eigen, sym_tridiag_eigen,
    EigenDecomposition, SymTridiag,
};
pub use metzler::metzler_exp;
pub use special::{
    ln_factorial, ln_gamma, log_pochhammer, log_pochhammer_complex, LogValue,
};

/// Largest absolute entry of a real matrix.
pub fn max_abs(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}
