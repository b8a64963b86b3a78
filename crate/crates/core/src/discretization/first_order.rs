use nalgebra::DMatrix;

use super::{OperatorBundle, Scheme};
use crate::error::{Error, Result};
use crate::grid::BeamState;
use crate::linalg::{dot, TridiagonalLu};

/// First-order form `ẋ = A x` of a bundle.
///
/// ORFD: `x = [z_1..z_{N+1}; ż_1..ż_{N+1}]` and
/// `A = [0, I; -mass⁻¹ stiffness, -mass⁻¹ damping]`.
///
/// FD: the boundary row has no inertia and is eliminated. With `ξ = 0` it
/// fixes `z_{N+1}` in terms of `z_1..z_N` and `x = [z_1..z_N; ż_1..ż_N]`.
/// With `ξ > 0` it fixes `ż_{N+1}` and `x = [z_1..z_{N+1}; ż_1..ż_N]`.
#[derive(Debug, Clone)]
pub struct FirstOrderSystem<'a> {
    bundle: &'a OperatorBundle,
    mass_lu: Option<TridiagonalLu>,
    /// FD boundary row `k_b` (`k_b · z + ξ ż_{N+1} = 0`), matrix-free route.
    boundary_row: Vec<f64>,
}

impl OperatorBundle {
    pub fn to_first_order(&self) -> Result<FirstOrderSystem<'_>> {
        FirstOrderSystem::new(self)
    }
}

impl<'a> FirstOrderSystem<'a> {
    pub fn new(bundle: &'a OperatorBundle) -> Result<Self> {
        let m = bundle.free_len();
        match bundle.scheme() {
            Scheme::Orfd => Ok(FirstOrderSystem {
                bundle,
                mass_lu: Some(bundle.mass().factor()?),
                boundary_row: Vec::new(),
            }),
            Scheme::Fd => {
                let mut e = vec![0.0; m];
                let mut row = Vec::with_capacity(m);
                for j in 0..m {
                    e[j] = 1.0;
                    row.push(bundle.apply_stiffness(&e)[m - 1]);
                    e[j] = 0.0;
                }
                let scale = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if bundle.xi() == 0.0 && row[m - 1].abs() <= 1e-12 * scale {
                    return Err(Error::Singular {
                        context: "FD boundary constraint",
                    });
                }
                Ok(FirstOrderSystem {
                    bundle,
                    mass_lu: None,
                    boundary_row: row,
                })
            }
        }
    }

    pub fn bundle(&self) -> &OperatorBundle {
        self.bundle
    }

    pub fn dim(&self) -> usize {
        let n = self.bundle.grid().n();
        match (self.bundle.scheme(), self.bundle.xi() > 0.0) {
            (Scheme::Orfd, _) => 2 * n + 2,
            (Scheme::Fd, false) => 2 * n,
            (Scheme::Fd, true) => 2 * n + 1,
        }
    }

    /// Full `(z_free, ż_free)` from a state vector.
    fn expand(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.bundle.grid().n();
        let kb = &self.boundary_row;
        match (self.bundle.scheme(), self.bundle.xi() > 0.0) {
            (Scheme::Orfd, _) => (x[..n + 1].to_vec(), x[n + 1..].to_vec()),
            (Scheme::Fd, false) => {
                let tip = |v: &[f64]| -dot(&kb[..n], v) / kb[n];
                let mut z = x[..n].to_vec();
                z.push(tip(&x[..n]));
                let mut zd = x[n..].to_vec();
                zd.push(tip(&x[n..]));
                (z, zd)
            }
            (Scheme::Fd, true) => {
                let z = x[..n + 1].to_vec();
                let mut zd = x[n + 1..].to_vec();
                zd.push(-dot(kb, &z) / self.bundle.xi());
                (z, zd)
            }
        }
    }

    /// Matrix-free `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        let n = self.bundle.grid().n();
        let (z, zd) = self.expand(x);
        let k = self.bundle.apply_stiffness(&z);
        match (self.bundle.scheme(), self.bundle.xi() > 0.0) {
            (Scheme::Orfd, _) => {
                let d = self.bundle.apply_damping(&zd);
                let mut acc: Vec<f64> = k.iter().zip(&d).map(|(a, b)| -(a + b)).collect();
                self.mass_lu
                    .as_ref()
                    .expect("ORFD mass factor")
                    .solve_in_place(&mut acc);
                let mut out = zd;
                out.extend(acc);
                out
            }
            (Scheme::Fd, false) => {
                let mut out = zd[..n].to_vec();
                out.extend(k[..n].iter().map(|v| -v));
                out
            }
            (Scheme::Fd, true) => {
                let mut out = zd;
                out.extend(k[..n].iter().map(|v| -v));
                out
            }
        }
    }

    /// Dense `A` built from the dense stiffness and dense LU solves.
    pub fn materialize(&self) -> Result<DMatrix<f64>> {
        let b = self.bundle;
        let n = b.grid().n();
        let m = n + 1;
        let k = b.stiffness_dense()?;
        let dim = self.dim();
        let mut a = DMatrix::zeros(dim, dim);
        match (b.scheme(), b.xi() > 0.0) {
            (Scheme::Orfd, _) => {
                let lu = b.mass().to_dense().lu();
                let mk = lu.solve(&k).ok_or(Error::Singular { context: "mass matrix" })?;
                let md = lu
                    .solve(&b.damping_dense())
                    .ok_or(Error::Singular { context: "mass matrix" })?;
                a.view_mut((0, m), (m, m)).fill_with_identity();
                a.view_mut((m, 0), (m, m)).copy_from(&(-mk));
                a.view_mut((m, m), (m, m)).copy_from(&(-md));
            }
            (Scheme::Fd, false) => {
                let kb = k.row(n);
                if kb[n] == 0.0 {
                    return Err(Error::Singular {
                        context: "FD boundary constraint",
                    });
                }
                // z = E z' with E = [I; -kb[..N] / kb[N]].
                let mut e = DMatrix::zeros(m, n);
                e.view_mut((0, 0), (n, n)).fill_with_identity();
                for j in 0..n {
                    e[(n, j)] = -kb[j] / kb[n];
                }
                let reduced = k.rows(0, n) * e;
                a.view_mut((0, n), (n, n)).fill_with_identity();
                a.view_mut((n, 0), (n, n)).copy_from(&(-reduced));
            }
            (Scheme::Fd, true) => {
                let xi = b.xi();
                a.view_mut((0, m), (n, n)).fill_with_identity();
                for j in 0..m {
                    a[(n, j)] = -k[(n, j)] / xi;
                }
                a.view_mut((m, 0), (n, m)).copy_from(&(-k.rows(0, n)));
            }
        }
        Ok(a)
    }

    /// State vector of a nodal state. For FD the components eliminated by the
    /// boundary constraint are dropped.
    pub fn lift(&self, state: &BeamState) -> Result<Vec<f64>> {
        state.check(self.bundle.grid())?;
        let n = self.bundle.grid().n();
        let z = state.z_free();
        let zd = state.zdot_free();
        let mut x = Vec::with_capacity(self.dim());
        match (self.bundle.scheme(), self.bundle.xi() > 0.0) {
            (Scheme::Orfd, _) => {
                x.extend_from_slice(z);
                x.extend_from_slice(zd);
            }
            (Scheme::Fd, false) => {
                x.extend_from_slice(&z[..n]);
                x.extend_from_slice(&zd[..n]);
            }
            (Scheme::Fd, true) => {
                x.extend_from_slice(z);
                x.extend_from_slice(&zd[..n]);
            }
        }
        Ok(x)
    }

    /// Nodal state of a state vector, with eliminated components restored.
    pub fn restrict(&self, x: &[f64], t: f64) -> BeamState {
        let (z, zd) = self.expand(x);
        BeamState::from_free(&z, &zd, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::BeamCoefficients;
    use crate::discretization::ShearClosure;
    use crate::grid::Grid;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;

    fn all_bundles(n: usize, xi: f64) -> Vec<OperatorBundle> {
        let g = Grid::new(n).unwrap();
        let c = BeamCoefficients::new(0.6, 1.2, 1.9).unwrap();
        vec![
            OperatorBundle::assemble_orfd(&c, &g, xi).unwrap(),
            OperatorBundle::assemble_orfd_with(&c, &g, xi, ShearClosure::Replicated).unwrap(),
            OperatorBundle::assemble_fd(&c, &g, xi).unwrap(),
        ]
    }

    #[test]
    fn apply_matches_materialized() {
        let mut rng = SplitMix64::seed_from_u64(10);
        for xi in [0.0, 3.0] {
            for b in all_bundles(10, xi) {
                let sys = b.to_first_order().unwrap();
                let a = sys.materialize().unwrap();
                assert_eq!(a.nrows(), sys.dim());
                for _ in 0..5 {
                    let x: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let dense = &a * DVector::from_vec(x.clone());
                    let free = sys.apply(&x);
                    let scale = dense.amax().max(1.0);
                    for (d, f) in dense.iter().zip(&free) {
                        assert!((d - f).abs() <= 1e-12 * scale, "{:?} xi={xi}: {d} vs {f}", b.scheme());
                    }
                }
            }
        }
    }

    #[test]
    fn open_loop_trace_vanishes() {
        for b in all_bundles(8, 0.0) {
            let a = b.to_first_order().unwrap().materialize().unwrap();
            assert!(a.trace().abs() <= 1e-12 * a.amax());
        }
    }

    #[test]
    fn displacement_only_input() {
        let b = &all_bundles(6, 1.5)[0];
        let sys = b.to_first_order().unwrap();
        let z: Vec<f64> = (1..=7).map(|i| (i as f64).sin()).collect();
        let mut x = z.clone();
        x.extend(vec![0.0; 7]);
        let ax = sys.apply(&x);
        assert!(ax[..7].iter().all(|&v| v == 0.0));
        let k = b.apply_stiffness(&z);
        let mass = b.mass().mul_vec(&ax[7..]);
        for (mv, kv) in mass.iter().zip(&k) {
            assert!((mv + kv).abs() <= 1e-9 * kv.abs().max(1.0));
        }
    }

    #[test]
    fn lift_restrict_round_trip() {
        for xi in [0.0, 2.0] {
            for b in all_bundles(5, xi) {
                let sys = b.to_first_order().unwrap();
                let x: Vec<f64> = (0..sys.dim()).map(|i| (i as f64 * 0.7).cos()).collect();
                let s = sys.restrict(&x, 0.5);
                assert_eq!(s.t, 0.5);
                s.check(b.grid()).unwrap();
                assert_eq!(sys.lift(&s).unwrap(), x);
            }
        }
    }

    #[test]
    fn fd_open_loop_state_satisfies_constraint() {
        let b = &all_bundles(7, 0.0)[2];
        let sys = b.to_first_order().unwrap();
        let x: Vec<f64> = (0..sys.dim()).map(|i| (i as f64).sqrt()).collect();
        let s = sys.restrict(&x, 0.0);
        let k = b.apply_stiffness(s.z_free());
        let scale = k.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(k[7].abs() <= 1e-10 * scale);
    }
}
