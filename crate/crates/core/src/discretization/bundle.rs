use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{assemble_ah, central_differences, ghost_extend, ShearWorkspace};
use crate::beam::BeamCoefficients;
use crate::error::{Error, Result};
use crate::grid::{Grid, MIN_INTERIOR_NODES};
use crate::linalg::{Tridiagonal, TridiagonalLu};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Orfd,
    Fd,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Orfd => "orfd",
            Scheme::Fd => "fd",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "orfd" => Ok(Scheme::Orfd),
            "fd" => Ok(Scheme::Fd),
            other => Err(Error::invalid(
                "scheme",
                format!("unknown scheme '{other}' (expected orfd or fd)"),
            )),
        }
    }
}

/// How the ORFD shear coupling is closed at the free end.
///
/// `EnergyConsistent` takes `φ_{N+1} = 0` in the last interior row and
/// `(B/2) φ_N` in the boundary row, so the stiffness is the gradient of the
/// discrete energy and the open-loop scheme conserves it exactly.
/// `Replicated` takes `φ_{N+1} = φ_N` and `B φ_N`; it is kept for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShearClosure {
    #[default]
    EnergyConsistent,
    Replicated,
}

/// Mass, stiffness and damping of one semi-discrete scheme over `z_1..z_{N+1}`:
/// `mass · z̈ + stiffness · z + damping · ż = 0`.
///
/// The damping is `ξ` on the tip velocity in the boundary row. For the FD
/// scheme the boundary row has no inertia, so its mass matrix is singular and
/// the row acts as a constraint.
#[derive(Debug, Clone)]
pub struct OperatorBundle {
    scheme: Scheme,
    closure: ShearClosure,
    coeffs: BeamCoefficients,
    grid: Grid,
    xi: f64,
    mass: Tridiagonal,
    shear: ShearWorkspace,
    fd_shear: Option<TridiagonalLu>,
}

fn check_inputs(coeffs: &BeamCoefficients, grid: &Grid, xi: f64) -> Result<()> {
    coeffs.validate()?;
    if grid.n() < MIN_INTERIOR_NODES {
        return Err(Error::invalid(
            "N",
            format!("need at least {MIN_INTERIOR_NODES} interior nodes, got {}", grid.n()),
        ));
    }
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(Error::invalid(
            "xi",
            format!("feedback gain must be finite and non-negative, got {xi}"),
        ));
    }
    Ok(())
}

impl OperatorBundle {
    pub fn assemble(scheme: Scheme, coeffs: &BeamCoefficients, grid: &Grid, xi: f64) -> Result<Self> {
        match scheme {
            Scheme::Orfd => Self::assemble_orfd(coeffs, grid, xi),
            Scheme::Fd => Self::assemble_fd(coeffs, grid, xi),
        }
    }

    pub fn assemble_orfd(coeffs: &BeamCoefficients, grid: &Grid, xi: f64) -> Result<Self> {
        Self::assemble_orfd_with(coeffs, grid, xi, ShearClosure::default())
    }

    pub fn assemble_orfd_with(coeffs: &BeamCoefficients, grid: &Grid, xi: f64, closure: ShearClosure) -> Result<Self> {
        check_inputs(coeffs, grid, xi)?;
        let n = grid.n();
        let h = grid.h();
        let mut lower = vec![0.25; n];
        let mut diag = vec![0.5; n + 1];
        lower[n - 1] = h / 4.0;
        diag[n] = h / 4.0;
        let mass = Tridiagonal::new(lower, diag, vec![0.25; n]);
        Ok(OperatorBundle {
            scheme: Scheme::Orfd,
            closure,
            coeffs: *coeffs,
            grid: grid.clone(),
            xi,
            mass,
            shear: ShearWorkspace::new(coeffs, grid)?,
            fd_shear: None,
        })
    }

    pub fn assemble_fd(coeffs: &BeamCoefficients, grid: &Grid, xi: f64) -> Result<Self> {
        check_inputs(coeffs, grid, xi)?;
        let n = grid.n();
        let mut diag = vec![1.0; n + 1];
        diag[n] = 0.0;
        let mass = Tridiagonal::new(vec![0.0; n], diag, vec![0.0; n]);
        let fd_shear = assemble_ah(grid)
            .combine(coeffs.c, &Tridiagonal::identity(n), coeffs.p)
            .factor()?;
        Ok(OperatorBundle {
            scheme: Scheme::Fd,
            closure: ShearClosure::default(),
            coeffs: *coeffs,
            grid: grid.clone(),
            xi,
            mass,
            shear: ShearWorkspace::new(coeffs, grid)?,
            fd_shear: Some(fd_shear),
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn closure(&self) -> ShearClosure {
        self.closure
    }

    pub fn coeffs(&self) -> &BeamCoefficients {
        &self.coeffs
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn mass(&self) -> &Tridiagonal {
        &self.mass
    }

    /// The ORFD shear workspace; also used to evaluate the discrete energy
    /// of FD states.
    pub fn shear_workspace(&self) -> &ShearWorkspace {
        &self.shear
    }

    pub fn free_len(&self) -> usize {
        self.grid.free_len()
    }

    /// Shear angles `φ_1..φ_N` produced by this scheme's shear equation.
    pub fn shear_angles(&self, z_free: &[f64]) -> Vec<f64> {
        match &self.fd_shear {
            None => self.shear.shear_unchecked(&central_differences(z_free)),
            Some(lu) => {
                let ze = ghost_extend(z_free);
                let h3 = self.grid.h().powi(3);
                let z = |i: usize| ze[i + 1];
                let mut rhs: Vec<f64> = (1..=self.grid.n())
                    .map(|i| -0.5 * self.coeffs.b * (z(i + 2) - 3.0 * z(i + 1) + 3.0 * z(i) - z(i - 1)) / h3)
                    .collect();
                lu.solve_in_place(&mut rhs);
                rhs
            }
        }
    }

    /// Matrix-free stiffness: the shear is recomputed by banded solves.
    pub fn apply_stiffness(&self, z_free: &[f64]) -> Vec<f64> {
        assert_eq!(z_free.len(), self.free_len());
        let n = self.grid.n();
        let h = self.grid.h();
        let b = self.coeffs.b;
        let ze = ghost_extend(z_free);
        // `z(i + 1)` reads mesh index `i`; offsets keep indices unsigned.
        let z = |i: usize| ze[i];
        let d4 = |i: usize| (z(i + 3) - 4.0 * z(i + 2) + 6.0 * z(i + 1) - 4.0 * z(i) + z(i - 1)) / h.powi(4);
        let phi = self.shear_angles(z_free);
        let phi_at = |j: usize, tip: f64| match j {
            0 => 0.0,
            j if j == n + 1 => tip,
            j => phi[j - 1],
        };
        let mut out = Vec::with_capacity(n + 1);
        match self.scheme {
            Scheme::Orfd => {
                let (tip, boundary_factor) = match self.closure {
                    ShearClosure::EnergyConsistent => (0.0, 0.5 * b),
                    ShearClosure::Replicated => (phi[n - 1], b),
                };
                for i in 1..=n {
                    out.push(d4(i) - b / (2.0 * h) * (phi_at(i + 1, tip) - phi_at(i - 1, tip)));
                }
                let d3 = (z(n + 3) - 3.0 * z(n + 2) + 3.0 * z(n + 1) - z(n)) / h.powi(3);
                out.push(-d3 + boundary_factor * phi[n - 1]);
            }
            Scheme::Fd => {
                let tip = phi[n - 1];
                for i in 1..=n {
                    out.push(d4(i) - b / h * (phi_at(i + 1, tip) - phi_at(i, tip)));
                }
                let third = (z(n + 3) - 3.0 * z(n + 1) + 3.0 * z(n) - z(n - 1)) / h.powi(3);
                out.push(third - b * phi[n - 1]);
            }
        }
        out
    }

    /// Dense stiffness assembled from explicit stencil rows and a dense LU of
    /// the shear operator, independently of [`Self::apply_stiffness`].
    pub fn stiffness_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.grid.n();
        let m = n + 1;
        let h = self.grid.h();
        let b = self.coeffs.b;
        let (c, p) = (self.coeffs.c, self.coeffs.p);
        let zrow = |i: isize| -> DVector<f64> {
            let mut v = DVector::zeros(m);
            if i >= 1 && i <= m as isize {
                v[i as usize - 1] = 1.0;
            } else if i == m as isize + 1 {
                v[m - 1] = 2.0;
                v[m - 2] -= 1.0;
            }
            v
        };
        let d4 =
            |i: isize| (zrow(i + 2) - zrow(i + 1) * 4.0 + zrow(i) * 6.0 - zrow(i - 1) * 4.0 + zrow(i - 2)) / h.powi(4);

        let ah = assemble_ah(&self.grid).to_dense();
        let phi_rows: DMatrix<f64> = match self.scheme {
            Scheme::Orfd => {
                let mm = super::assemble_m(&self.grid).to_dense();
                let op = &ah * c + mm * p;
                let r = op.lu().solve(&ah).ok_or(Error::Singular {
                    context: "shear operator",
                })?;
                let mut dy = DMatrix::zeros(n, m);
                for j in 1..=n {
                    dy.set_row(j - 1, &(zrow(j as isize + 1) - zrow(j as isize - 1)).transpose());
                }
                r * dy * (b / (2.0 * h))
            }
            Scheme::Fd => {
                let op = &ah * c + DMatrix::identity(n, n) * p;
                let mut d3 = DMatrix::zeros(n, m);
                for i in 1..=n as isize {
                    let row = (zrow(i + 2) - zrow(i + 1) * 3.0 + zrow(i) * 3.0 - zrow(i - 1)) / h.powi(3);
                    d3.set_row(i as usize - 1, &row.transpose());
                }
                op.lu().solve(&(d3 * (-0.5 * b))).ok_or(Error::Singular {
                    context: "FD shear operator",
                })?
            }
        };
        let zero = DVector::zeros(m);
        let phi = |j: usize, tip: &DVector<f64>| -> DVector<f64> {
            match j {
                0 => zero.clone(),
                j if j == n + 1 => tip.clone(),
                j => phi_rows.row(j - 1).transpose(),
            }
        };
        let phi_n = phi_rows.row(n - 1).transpose();

        let mut k = DMatrix::zeros(m, m);
        match self.scheme {
            Scheme::Orfd => {
                let (tip, factor) = match self.closure {
                    ShearClosure::EnergyConsistent => (zero.clone(), 0.5 * b),
                    ShearClosure::Replicated => (phi_n.clone(), b),
                };
                for i in 1..=n {
                    let row = d4(i as isize) - (phi(i + 1, &tip) - phi(i - 1, &tip)) * (b / (2.0 * h));
                    k.set_row(i - 1, &row.transpose());
                }
                let ni = n as isize;
                let d3 = (zrow(ni + 2) - zrow(ni + 1) * 3.0 + zrow(ni) * 3.0 - zrow(ni - 1)) / h.powi(3);
                k.set_row(n, &(-d3 + &phi_n * factor).transpose());
            }
            Scheme::Fd => {
                for i in 1..=n {
                    let row = d4(i as isize) - (phi(i + 1, &phi_n) - phi(i, &phi_n)) * (b / h);
                    k.set_row(i - 1, &row.transpose());
                }
                let ni = n as isize;
                let third = (zrow(ni + 2) - zrow(ni) * 3.0 + zrow(ni - 1) * 3.0 - zrow(ni - 2)) / h.powi(3);
                k.set_row(n, &(third - &phi_n * b).transpose());
            }
        }
        Ok(k)
    }

    pub fn apply_damping(&self, zdot_free: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; zdot_free.len()];
        let last = out.len() - 1;
        out[last] = self.xi * zdot_free[last];
        out
    }

    pub fn damping_dense(&self) -> DMatrix<f64> {
        let m = self.free_len();
        let mut d = DMatrix::zeros(m, m);
        d[(m - 1, m - 1)] = self.xi;
        d
    }
}
