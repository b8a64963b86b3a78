pub mod eigen;
pub mod tridiag;

pub use eigen::{dense_eigenvalues, dense_eigenvalues_with, EigenOptions};
pub use tridiag::{Tridiagonal, TridiagonalLu};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
