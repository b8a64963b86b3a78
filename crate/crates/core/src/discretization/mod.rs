//! Spatial discretization on the uniform grid.
//!
//! Unknowns are the free displacements `z_1..z_{N+1}`. The clamped end
//! contributes `z_0 = z_{-1} = 0`; the free end's ghost is
//! `z_{N+2} = 2 z_{N+1} - z_N`.

mod bundle;
mod first_order;
mod poincare;
mod shear;

pub use bundle::{OperatorBundle, Scheme, ShearClosure};
pub use first_order::FirstOrderSystem;
pub use poincare::{poincare_check, PoincareCheck};
pub use shear::ShearWorkspace;

use crate::grid::Grid;
use crate::linalg::Tridiagonal;

/// `(1/h²) tridiag(-1, 2, -1)` with last diagonal entry `1/h²`.
pub fn assemble_ah(grid: &Grid) -> Tridiagonal {
    let n = grid.n();
    let s = 1.0 / (grid.h() * grid.h());
    let mut diag = vec![2.0 * s; n];
    diag[n - 1] = s;
    Tridiagonal::new(vec![-s; n - 1], diag, vec![-s; n - 1])
}

/// `(1/4) tridiag(1, 2, 1)` with last diagonal entry `3/4`.
pub fn assemble_m(grid: &Grid) -> Tridiagonal {
    let n = grid.n();
    let mut diag = vec![0.5; n];
    diag[n - 1] = 0.75;
    Tridiagonal::new(vec![0.25; n - 1], diag, vec![0.25; n - 1])
}

/// Displacements `z_{-1}..z_{N+2}` from the free unknowns; index `i` of the
/// mesh lives at position `i + 1`.
pub fn ghost_extend(z_free: &[f64]) -> Vec<f64> {
    let m = z_free.len();
    let mut z = Vec::with_capacity(m + 3);
    z.push(0.0);
    z.push(0.0);
    z.extend_from_slice(z_free);
    let ghost = 2.0 * z_free[m - 1] - if m >= 2 { z_free[m - 2] } else { 0.0 };
    z.push(ghost);
    z
}

/// `y_j = z_{j+1} - z_{j-1}` for `j = 1..N`.
pub fn central_differences(z_free: &[f64]) -> Vec<f64> {
    let n = z_free.len() - 1;
    (1..=n)
        .map(|j| z_free[j] - if j >= 2 { z_free[j - 2] } else { 0.0 })
        .collect()
}

/// Shear angles `φ_0..φ_{N+1}` from `φ_1..φ_N`: `φ_0 = 0`, `φ_{N+1} = φ_N`.
pub fn extend_phi(phi: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phi.len() + 2);
    out.push(0.0);
    out.extend_from_slice(phi);
    out.push(*phi.last().expect("non-empty shear vector"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ah_single_node() {
        let a = assemble_ah(&Grid::new_unchecked(1));
        assert_eq!(a.diag, vec![4.0]);
    }

    #[test]
    fn ah_small_matrix() {
        let g = Grid::new(3).unwrap();
        let s = 1.0 / (g.h() * g.h());
        let a = assemble_ah(&g).to_dense();
        let expected = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a[(i, j)], s * expected[i][j]);
            }
        }
    }

    #[test]
    fn ah_row_sums() {
        let g = Grid::new(12).unwrap();
        let a = assemble_ah(&g);
        let sums = a.mul_vec(&[1.0; 12]);
        let s = 1.0 / (g.h() * g.h());
        assert!((sums[0] - s).abs() <= 1e-12 * s);
        assert!(sums[1..].iter().all(|v| v.abs() <= 1e-12 * s));
    }

    #[test]
    fn m_small_matrix_and_row_sums() {
        let m = assemble_m(&Grid::new(3).unwrap()).to_dense();
        let expected = [[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 3.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[(i, j)], expected[i][j] / 4.0);
            }
        }
        let sums = assemble_m(&Grid::new(7).unwrap()).mul_vec(&[1.0; 7]);
        assert_eq!(sums[0], 0.75);
        assert!(sums[1..].iter().all(|&v| v == 1.0));
    }

    #[test]
    fn shared_identity_is_exact() {
        for n in [3, 10, 50, 200] {
            let g = Grid::new(n).unwrap();
            let a = assemble_ah(&g).to_dense();
            let m = assemble_m(&g).to_dense();
            let h2 = g.h() * g.h();
            for i in 0..n {
                for j in 0..n {
                    let id = if i == j { 4.0 } else { 0.0 };
                    assert_eq!(id - 4.0 * m[(i, j)] - h2 * a[(i, j)], 0.0, "N={n} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn ghost_extension() {
        let z = ghost_extend(&[1.0, 2.0, 4.0, 7.0]);
        assert_eq!(z, vec![0.0, 0.0, 1.0, 2.0, 4.0, 7.0, 10.0]);
        assert_eq!(central_differences(&[1.0, 2.0, 4.0, 7.0]), vec![2.0, 3.0, 5.0]);
        assert_eq!(extend_phi(&[1.0, 2.0]), vec![0.0, 1.0, 2.0, 2.0]);
    }
}
