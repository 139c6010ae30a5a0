//! Numerical kernels shared by the evolver and the eigenvalue checks.

mod eigen;
mod expm;
mod sparse;

pub use eigen::{hermitian_eigen, lanczos_min_eigen, min_eigenvalue_dense, LanczosReport};
pub use expm::{expm_multiply, DensePropagator, KrylovOptions, KrylovStats};
pub use sparse::{dense_from_operator, CsrMatrix, HermitianOperator};

use num_complex::Complex64;

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
