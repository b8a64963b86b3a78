use nalgebra::DMatrix;

use super::{assemble_ah, assemble_m};
use crate::beam::BeamCoefficients;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{Tridiagonal, TridiagonalLu};

/// Factorizations for eliminating the shear angle from the ORFD scheme.
///
/// Holds `A_h`, `M`, an LU of `C A_h + P M` and an LU of
/// `(C/P - h²/4) A_h + I`, all tied to the `(B, C, P, h)` they were built for.
#[derive(Debug, Clone)]
pub struct ShearWorkspace {
    key: [f64; 4],
    ah: Tridiagonal,
    m: Tridiagonal,
    operator_lu: TridiagonalLu,
    k_lu: TridiagonalLu,
}

impl ShearWorkspace {
    pub fn new(coeffs: &BeamCoefficients, grid: &Grid) -> Result<Self> {
        coeffs.validate()?;
        let h = grid.h();
        let ah = assemble_ah(grid);
        let m = assemble_m(grid);
        let operator_lu = ah.combine(coeffs.c, &m, coeffs.p).factor()?;

        let alpha = coeffs.c / coeffs.p - h * h / 4.0;
        let lambda_max = crate::spectral::ah_eigenvalue(grid, grid.n());
        if 1.0 + alpha * lambda_max <= 0.0 {
            return Err(Error::invalid(
                "coefficients",
                format!("C/P - h²/4 = {alpha} leaves (C/P - h²/4)A_h + I indefinite"),
            ));
        }
        let k_lu = ah.combine(alpha, &Tridiagonal::identity(grid.n()), 1.0).factor()?;
        Ok(ShearWorkspace {
            key: [coeffs.b, coeffs.c, coeffs.p, h],
            ah,
            m,
            operator_lu,
            k_lu,
        })
    }

    pub fn ah(&self) -> &Tridiagonal {
        &self.ah
    }

    pub fn m(&self) -> &Tridiagonal {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.ah.dim()
    }

    fn b(&self) -> f64 {
        self.key[0]
    }

    fn h(&self) -> f64 {
        self.key[3]
    }

    pub fn ensure_current(&self, coeffs: &BeamCoefficients, grid: &Grid) -> Result<()> {
        let requested = [coeffs.b, coeffs.c, coeffs.p, grid.h()];
        if requested != self.key || grid.n() != self.dim() {
            let fmt = |k: &[f64; 4]| format!("B={} C={} P={} h={}", k[0], k[1], k[2], k[3]);
            return Err(Error::StaleWorkspace {
                built: fmt(&self.key),
                requested: fmt(&requested),
            });
        }
        Ok(())
    }

    /// `φ = (B/2h)(C A_h + P M)⁻¹ A_h y`.
    pub fn solve_shear(&self, coeffs: &BeamCoefficients, grid: &Grid, y: &[f64]) -> Result<Vec<f64>> {
        self.ensure_current(coeffs, grid)?;
        self.check_len(y)?;
        Ok(self.shear_unchecked(y))
    }

    /// The unique `k` with `((C/P - h²/4) A_h + I) k = y`.
    pub fn solve_k(&self, coeffs: &BeamCoefficients, grid: &Grid, y: &[f64]) -> Result<Vec<f64>> {
        self.ensure_current(coeffs, grid)?;
        self.check_len(y)?;
        Ok(self.k_lu.solve(y))
    }

    /// Shear angles through the auxiliary vector: `φ = (B/(2Ph)) A_h k`.
    pub fn shear_via_k(&self, coeffs: &BeamCoefficients, grid: &Grid, y: &[f64]) -> Result<Vec<f64>> {
        let k = self.solve_k(coeffs, grid, y)?;
        let scale = coeffs.b / (2.0 * coeffs.p * grid.h());
        Ok(self.ah.mul_vec(&k).into_iter().map(|v| scale * v).collect())
    }

    fn check_len(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: y.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn shear_unchecked(&self, y: &[f64]) -> Vec<f64> {
        let scale = self.b() / (2.0 * self.h());
        let mut v = self.response(y);
        v.iter_mut().for_each(|x| *x *= scale);
        v
    }

    /// `R y = (C A_h + P M)⁻¹ A_h y`.
    pub fn response(&self, y: &[f64]) -> Vec<f64> {
        let mut v = self.ah.mul_vec(y);
        self.operator_lu.solve_in_place(&mut v);
        v
    }

    /// Dense `R = (C A_h + P M)⁻¹ A_h`.
    pub fn response_dense(&self) -> DMatrix<f64> {
        self.columns(|e| self.response(e))
    }

    /// Dense `J_h = (1/C) I - (P/C)(C A_h + P M)⁻¹ M`.
    pub fn j_operator_dense(&self, coeffs: &BeamCoefficients) -> DMatrix<f64> {
        self.columns(|e| {
            let mut v = self.m.mul_vec(e);
            self.operator_lu.solve_in_place(&mut v);
            e.iter()
                .zip(v)
                .map(|(ei, vi)| ei / coeffs.c - coeffs.p / coeffs.c * vi)
                .collect()
        })
    }

    fn columns(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = f(&e);
            e[j] = 0.0;
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}
