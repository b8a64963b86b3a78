//! Tridiagonal matrices and their LU factorization with partial pivoting.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Square tridiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// Sub-diagonal, `lower[i] = a[i+1][i]`.
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// Super-diagonal, `upper[i] = a[i][i+1]`.
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Self {
        let n = diag.len();
        assert!(n >= 1);
        assert_eq!(lower.len(), n - 1);
        assert_eq!(upper.len(), n - 1);
        Tridiagonal { lower, diag, upper }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![0.0; n - 1], vec![1.0; n], vec![0.0; n - 1])
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i == j + 1 {
            self.lower[j]
        } else if j == i + 1 {
            self.upper[i]
        } else {
            0.0
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.upper[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// `alpha · self + beta · other`.
    pub fn combine(&self, alpha: f64, other: &Tridiagonal, beta: f64) -> Tridiagonal {
        assert_eq!(self.dim(), other.dim());
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect();
        Tridiagonal {
            lower: mix(&self.lower, &other.lower),
            diag: mix(&self.diag, &other.diag),
            upper: mix(&self.upper, &other.upper),
        }
    }

    pub fn scale(&self, alpha: f64) -> Tridiagonal {
        let s = |v: &[f64]| v.iter().map(|x| alpha * x).collect();
        Tridiagonal {
            lower: s(&self.lower),
            diag: s(&self.diag),
            upper: s(&self.upper),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.lower == self.upper
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    pub fn factor(&self) -> Result<TridiagonalLu> {
        TridiagonalLu::new(self)
    }
}

/// `P A = L U` for a tridiagonal `A`; `U` has two super-diagonals because of
/// row interchanges.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    pub fn new(a: &Tridiagonal) -> Result<Self> {
        let n = a.dim();
        let mut dl = a.lower.clone();
        let mut d = a.diag.clone();
        let mut du = a.upper.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }

        let scale = a
            .diag
            .iter()
            .chain(&a.lower)
            .chain(&a.upper)
            .fold(0.0f64, |m, x| m.max(x.abs()));
        // Pivots this small relative to the entries mean the matrix is numerically singular.
        if d.iter()
            .any(|x| !x.is_finite() || x.abs() <= 1e-2 * f64::EPSILON * scale)
        {
            return Err(Error::Singular {
                context: "tridiagonal LU",
            });
        }
        Ok(TridiagonalLu {
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(a: &Tridiagonal, x: &[f64], b: &[f64]) -> f64 {
        a.mul_vec(x)
            .iter()
            .zip(b)
            .map(|(ax, bi)| (ax - bi).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn one_by_one() {
        let a = Tridiagonal::new(vec![], vec![4.0], vec![]);
        assert_eq!(a.factor().unwrap().solve(&[8.0]), vec![2.0]);
    }

    #[test]
    fn needs_pivoting() {
        // Zero leading diagonal: plain Thomas elimination would divide by zero.
        let a = Tridiagonal::new(vec![1.0, 1.0, 1.0], vec![0.0, 2.0, 0.5, 3.0], vec![1.0, 1.0, 2.0]);
        let b = [1.0, -2.0, 3.0, 0.25];
        let x = a.factor().unwrap().solve(&b);
        assert!(residual(&a, &x, &b) < 1e-13);
    }

    #[test]
    fn singular_is_reported() {
        let a = Tridiagonal::new(vec![1.0], vec![1.0, 1.0], vec![1.0]);
        assert!(matches!(a.factor(), Err(Error::Singular { .. })));
    }

    proptest! {
        #[test]
        fn solves_diagonally_dominant(n in 1usize..40, seed in proptest::collection::vec(-1.0f64..1.0, 160)) {
            let lower: Vec<f64> = seed[..n.saturating_sub(1)].to_vec();
            let upper: Vec<f64> = seed[40..40 + n.saturating_sub(1)].to_vec();
            let diag: Vec<f64> = seed[80..80 + n].iter().map(|v| 3.0 + v).collect();
            let b: Vec<f64> = seed[120..120 + n].to_vec();
            let a = Tridiagonal::new(lower, diag, upper);
            let x = a.factor().unwrap().solve(&b);
            prop_assert!(residual(&a, &x, &b) < 1e-12);
        }
    }
}
