//! Discrete energy, implicit-midpoint time stepping, trajectories and
//! boundary observability certificates.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::beam::large_shear_condition;
use crate::discretization::{central_differences, FirstOrderSystem, OperatorBundle, Scheme};
use crate::error::{Error, Result};
use crate::grid::{BeamState, Grid};
use crate::linalg::dot;

/// `E_h = (h/2) Σ (ż_{j+½})² + (h/2) Σ (δ²z_j)² + (B/4) Σ φ_j y_j`, with the
/// first two sums over `j = 0..N` and `φ` from the averaged shear equation.
///
/// FD states are measured with the same functional so the two schemes share
/// one yardstick.
pub fn discrete_energy(bundle: &OperatorBundle, state: &BeamState) -> Result<f64> {
    let grid = bundle.grid();
    state.check(grid)?;
    let n = grid.n();
    let h = grid.h();
    let z = &state.z;
    let zd = &state.zdot;

    let kinetic: f64 = (0..=n).map(|j| (0.5 * (zd[j] + zd[j + 1])).powi(2)).sum();
    let bending: f64 = (0..=n)
        .map(|j| {
            let below = if j == 0 { 0.0 } else { z[j - 1] };
            ((z[j + 1] - 2.0 * z[j] + below) / (h * h)).powi(2)
        })
        .sum();
    let y = central_differences(state.z_free());
    let phi = bundle.shear_workspace().shear_unchecked(&y);
    let shear = 0.25 * bundle.coeffs().b * dot(&phi, &y);
    Ok(0.5 * h * (kinetic + bending) + shear)
}

/// Implicit midpoint for `ẋ = A x` with the one-step map
/// `(I - dt/2 A)⁻¹ (I + dt/2 A)` formed once.
#[derive(Debug, Clone)]
pub struct Stepper {
    propagator: DMatrix<f64>,
    dt: f64,
}

impl Stepper {
    pub fn new(system: &FirstOrderSystem<'_>, dt: f64) -> Result<Self> {
        Self::from_matrix(&system.materialize()?, dt)
    }

    pub fn from_matrix(a: &DMatrix<f64>, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("time step must be positive, got {dt}")));
        }
        let n = a.nrows();
        let id = DMatrix::<f64>::identity(n, n);
        let lhs = &id - a * (0.5 * dt);
        let rhs = &id + a * (0.5 * dt);
        let scale = lhs.amax();
        let lu = lhs.lu();
        let min_pivot = lu.u().diagonal().amin();
        if !(min_pivot > 1e-14 * scale) {
            return Err(Error::Singular {
                context: "implicit midpoint matrix",
            });
        }
        let propagator = lu.solve(&rhs).ok_or(Error::Singular {
            context: "implicit midpoint matrix",
        })?;
        Ok(Stepper { propagator, dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, x: &[f64]) -> Vec<f64> {
        (&self.propagator * DVector::from_column_slice(x)).as_slice().to_vec()
    }
}

/// One implicit-midpoint step from a nodal state.
pub fn step(bundle: &OperatorBundle, state: &BeamState, dt: f64) -> Result<BeamState> {
    let system = bundle.to_first_order()?;
    let stepper = Stepper::new(&system, dt)?;
    let x = stepper.step(&system.lift(state)?);
    Ok(system.restrict(&x, state.t + dt))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub scheme: Scheme,
    pub xi: f64,
    pub n: usize,
    /// Step actually used: `T / ⌈T / dt⌉`.
    pub dt: f64,
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    /// Tip velocity `ż_{N+1}`.
    pub sensor: Vec<f64>,
    pub snapshots: Vec<BeamState>,
}

impl TrajectoryRecord {
    pub fn initial_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn final_energy(&self) -> f64 {
        *self.energies.last().expect("non-empty trajectory")
    }

    /// `E_h(T) / E_h(0)`, or 1 when the initial energy vanishes.
    pub fn energy_ratio(&self) -> f64 {
        let e0 = self.initial_energy();
        if e0 == 0.0 {
            1.0
        } else {
            self.final_energy() / e0
        }
    }

    pub fn max_sensor(&self) -> f64 {
        self.sensor.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Composite trapezoid rule for `∫ (ż_{N+1})² dt`.
    pub fn sensor_integral(&self) -> f64 {
        trapezoid(&self.sensor.iter().map(|v| v * v).collect::<Vec<_>>(), self.dt)
    }
}

fn trapezoid(samples: &[f64], dt: f64) -> f64 {
    match samples {
        [] | [_] => 0.0,
        [first, inner @ .., last] => dt * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Number of steps covering `[0, t_final]` with steps no longer than `dt`.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::invalid("T", format!("horizon must be positive, got {t_final}")));
    }
    if !(dt > 0.0 && dt <= t_final) {
        return Err(Error::invalid("dt", format!("need 0 < dt <= T, got dt = {dt}")));
    }
    let ratio = t_final / dt;
    let nearest = ratio.round();
    let steps = if (ratio - nearest).abs() <= 1e-9 * nearest {
        nearest
    } else {
        ratio.ceil()
    };
    Ok(steps as usize)
}

/// Integrates from `initial` to `t_final`, recording energy and tip velocity
/// every step and a full state every `snapshot_stride` steps (0 disables).
pub fn simulate(
    bundle: &OperatorBundle,
    initial: &BeamState,
    t_final: f64,
    dt: f64,
    snapshot_stride: usize,
) -> Result<TrajectoryRecord> {
    let steps = step_count(t_final, dt)?;
    let dt = t_final / steps as f64;
    let system = bundle.to_first_order()?;
    let stepper = Stepper::new(&system, dt)?;
    let mut x = system.lift(initial)?;

    let mut record = TrajectoryRecord {
        scheme: bundle.scheme(),
        xi: bundle.xi(),
        n: bundle.grid().n(),
        dt,
        times: Vec::with_capacity(steps + 1),
        energies: Vec::with_capacity(steps + 1),
        sensor: Vec::with_capacity(steps + 1),
        snapshots: Vec::new(),
    };
    let t0 = initial.t;
    for k in 0..=steps {
        if k > 0 {
            x = stepper.step(&x);
        }
        let t = if k == steps { t0 + t_final } else { t0 + k as f64 * dt };
        let state = system.restrict(&x, t);
        record.times.push(t);
        record.energies.push(discrete_energy(bundle, &state)?);
        record.sensor.push(state.tip_velocity());
        if snapshot_stride > 0 && k % snapshot_stride == 0 {
            record.snapshots.push(state);
        }
    }
    Ok(record)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservabilityCertificate {
    pub scheme: Scheme,
    pub n: usize,
    pub horizon: f64,
    pub dt: f64,
    /// `∫₀ᵀ (ż_{N+1})² dt`, composite trapezoid.
    pub integral: f64,
    /// `|I(dt) - I(dt/2)|`.
    pub quadrature_error: f64,
    pub e0: f64,
    /// `(T - 6) E_h(0)`
    pub theorem_bound: f64,
    pub condition_margin: f64,
    pub condition_holds: bool,
    pub satisfied: bool,
}

/// Relative slack on the bound side of the certificate.
pub const CERTIFICATE_SLACK: f64 = 1e-6;

pub fn observability_certificate(
    bundle: &OperatorBundle,
    initial: &BeamState,
    t_final: f64,
    dt: f64,
) -> Result<ObservabilityCertificate> {
    if bundle.xi() != 0.0 {
        return Err(Error::invalid(
            "xi",
            "the observability certificate needs the open-loop system (xi = 0)",
        ));
    }
    if !(t_final > 6.0) {
        return Err(Error::invalid(
            "T",
            format!("the observability certificate needs T > 6, got {t_final}"),
        ));
    }
    let coarse = simulate(bundle, initial, t_final, dt, 0)?;
    let fine = simulate(bundle, initial, t_final, coarse.dt / 2.0, 0)?;
    let integral = coarse.sensor_integral();
    let quadrature_error = (integral - fine.sensor_integral()).abs();
    let e0 = coarse.initial_energy();
    let theorem_bound = (t_final - 6.0) * e0;
    let condition = large_shear_condition(bundle.coeffs(), bundle.grid().h())?;
    Ok(ObservabilityCertificate {
        scheme: bundle.scheme(),
        n: bundle.grid().n(),
        horizon: t_final,
        dt: coarse.dt,
        integral,
        quadrature_error,
        e0,
        theorem_bound,
        condition_margin: condition.margin,
        condition_holds: condition.holds,
        satisfied: integral >= theorem_bound * (1.0 - CERTIFICATE_SLACK) - quadrature_error,
    })
}

/// `z_i = ż_i = amplitude` on nodes with `a ≤ x_i ≤ b`, zero elsewhere; the
/// clamped node stays at rest.
pub fn make_box_initial(grid: &Grid, amplitude: f64, a: f64, b: f64) -> Result<BeamState> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::invalid(
            "support",
            format!("need 0 <= a < b <= 1, got [{a}, {b}]"),
        ));
    }
    if !amplitude.is_finite() {
        return Err(Error::invalid("amplitude", "must be finite"));
    }
    let eps = 1e-12;
    let mut state = BeamState::zeros(grid);
    for i in 1..grid.node_count() {
        let x = grid.x(i);
        if x >= a - eps && x <= b + eps {
            state.z[i] = amplitude;
            state.zdot[i] = amplitude;
        }
    }
    Ok(state)
}

/// Free displacements and velocities drawn uniformly from
/// `[-amplitude, amplitude]` by SplitMix64 seeded with `seed`.
pub fn random_initial(grid: &Grid, amplitude: f64, seed: u64) -> BeamState {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let m = grid.free_len();
    let mut draw = || -> Vec<f64> { (0..m).map(|_| amplitude * rng.gen_range(-1.0..=1.0)).collect() };
    let z = draw();
    let zd = draw();
    BeamState::from_free(&z, &zd, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::BeamCoefficients;

    fn coeffs() -> BeamCoefficients {
        BeamCoefficients::new(0.3, 1.0, 1.0).unwrap()
    }

    fn orfd(n: usize, xi: f64) -> OperatorBundle {
        OperatorBundle::assemble_orfd(&coeffs(), &Grid::new(n).unwrap(), xi).unwrap()
    }

    #[test]
    fn zero_state_energy() {
        let b = orfd(6, 0.0);
        assert_eq!(discrete_energy(&b, &BeamState::zeros(b.grid())).unwrap(), 0.0);
    }

    #[test]
    fn uniform_velocity_energy() {
        let g = Grid::new(7).unwrap();
        let b = OperatorBundle::assemble_orfd(&BeamCoefficients::new(0.0, 1.0, 1.0).unwrap(), &g, 0.0).unwrap();
        let s = BeamState::from_free(&[0.0; 8], &[1.0; 8], 0.0);
        let expected = g.h() / 2.0 * (0.25 + 7.0);
        assert!((discrete_energy(&b, &s).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn energy_matches_quadratic_form() {
        // E = ½ zᵀ Q z + ½ żᵀ K ż, with Q and K assembled from difference matrices.
        let n = 8;
        let g = Grid::new(n).unwrap();
        let h = g.h();
        let c = BeamCoefficients::new(0.9, 1.4, 0.6).unwrap();
        let b = OperatorBundle::assemble_orfd(&c, &g, 0.0).unwrap();
        let m = n + 1;
        let mut sd = DMatrix::zeros(n + 1, m);
        let mut av = DMatrix::zeros(n + 1, m);
        for j in 0..=n {
            for (off, w) in [(1isize, 1.0), (0, -2.0), (-1, 1.0)] {
                let i = j as isize + off;
                if i >= 1 {
                    sd[(j, i as usize - 1)] += w / (h * h);
                }
            }
            if j >= 1 {
                av[(j, j - 1)] = 0.5;
            }
            av[(j, j)] = 0.5;
        }
        let mut dy = DMatrix::zeros(n, m);
        for j in 1..=n {
            dy[(j - 1, j)] = 1.0;
            if j >= 2 {
                dy[(j - 1, j - 2)] = -1.0;
            }
        }
        let r = b.shear_workspace().response_dense();
        let q = sd.transpose() * &sd * h + dy.transpose() * r * &dy * (c.b * c.b / (4.0 * h));
        let kin = av.transpose() * &av * h;
        let s = random_initial(&g, 1.0, 42);
        let z = DVector::from_column_slice(s.z_free());
        let zd = DVector::from_column_slice(s.zdot_free());
        let oracle = 0.5 * z.dot(&(&q * &z)) + 0.5 * zd.dot(&(&kin * &zd));
        let e = discrete_energy(&b, &s).unwrap();
        assert!((e - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn step_of_zero_is_zero() {
        let b = orfd(5, 0.0);
        let s = step(&b, &BeamState::zeros(b.grid()), 0.01).unwrap();
        assert!(s.z.iter().chain(&s.zdot).all(|&v| v == 0.0));
        assert_eq!(s.t, 0.01);
    }

    #[test]
    fn one_step_conserves_energy() {
        let b = orfd(10, 0.0);
        let s0 = random_initial(b.grid(), 1.0, 3);
        let s1 = step(&b, &s0, 1e-3).unwrap();
        let (e0, e1) = (discrete_energy(&b, &s0).unwrap(), discrete_energy(&b, &s1).unwrap());
        assert!((e1 - e0).abs() <= 1e-10 * e0);
    }

    #[test]
    fn cayley_map_keeps_rotation_on_circle() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, -3.0, 0.0]);
        let st = Stepper::from_matrix(&a, 0.05).unwrap();
        let mut x = vec![1.0, 0.0];
        for _ in 0..1000 {
            x = st.step(&x);
        }
        assert!(((x[0] * x[0] + x[1] * x[1]).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_midpoint_matrix_is_reported() {
        // I - dt/2·A vanishes for A = (2/dt) I.
        let a = DMatrix::identity(2, 2) * 20.0;
        assert!(matches!(Stepper::from_matrix(&a, 0.1), Err(Error::Singular { .. })));
    }

    #[test]
    fn step_count_rounding() {
        assert_eq!(step_count(10.0, 10.0 / 4096.0).unwrap(), 4096);
        assert_eq!(step_count(1.0, 0.3).unwrap(), 4);
        assert!(step_count(1.0, 0.0).is_err());
        assert!(step_count(1.0, 2.0).is_err());
    }

    #[test]
    fn open_loop_trajectory_conserves_energy() {
        for closure_n in [4, 12] {
            let b = orfd(closure_n, 0.0);
            let s0 = random_initial(b.grid(), 1.0, closure_n as u64);
            let rec = simulate(&b, &s0, 2.0, 2.0 / 512.0, 64).unwrap();
            assert_eq!(rec.times.len(), 513);
            assert_eq!(rec.snapshots.len(), 9);
            assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
            let e0 = rec.initial_energy();
            assert!(rec.energies.iter().all(|e| (e - e0).abs() <= 1e-10 * e0));
        }
    }

    #[test]
    fn closed_loop_energy_does_not_increase() {
        let b = orfd(10, 2.0);
        let s0 = random_initial(b.grid(), 1.0, 8);
        let rec = simulate(&b, &s0, 3.0, 3.0 / 600.0, 0).unwrap();
        let e0 = rec.initial_energy();
        assert!(rec.energies.windows(2).all(|w| w[1] <= w[0] + 1e-10 * e0));
        assert!(rec.final_energy() < e0);
    }

    #[test]
    fn box_initial_data() {
        let g = Grid::new(3).unwrap();
        let s = make_box_initial(&g, 1e-3, 0.25, 0.75).unwrap();
        assert_eq!(s.z, vec![0.0, 1e-3, 1e-3, 1e-3, 0.0]);
        assert_eq!(s.zdot, s.z);
        let s = make_box_initial(&g, 2.0, 0.0, 1.0).unwrap();
        assert_eq!(s.z, vec![0.0, 2.0, 2.0, 2.0, 2.0]);
        let s = make_box_initial(&g, 0.0, 0.25, 0.75).unwrap();
        assert!(s.z.iter().all(|&v| v == 0.0));
        assert!(make_box_initial(&g, 1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn certificate_preconditions_and_zero_data() {
        let b = orfd(4, 0.0);
        let zero = BeamState::zeros(b.grid());
        let c = observability_certificate(&b, &zero, 8.0, 8.0 / 256.0).unwrap();
        assert_eq!(c.integral, 0.0);
        assert_eq!(c.theorem_bound, 0.0);
        assert!(c.satisfied);
        assert!(observability_certificate(&b, &zero, 6.0, 0.01).is_err());
        assert!(observability_certificate(&orfd(4, 1.0), &zero, 8.0, 0.01).is_err());
    }

    #[test]
    fn certificate_degenerate_horizon() {
        let b = orfd(4, 0.0);
        let s = random_initial(b.grid(), 1.0, 1);
        let t = 6.0 + 1e-9;
        let c = observability_certificate(&b, &s, t, t / 64.0).unwrap();
        assert!(c.integral > 0.0);
        assert!(c.theorem_bound < 1e-8 * c.e0);
        assert!(c.satisfied);
    }

    #[test]
    fn fd_energy_is_finite_and_nonnegative() {
        let g = Grid::new(8).unwrap();
        let b = OperatorBundle::assemble_fd(&coeffs(), &g, 0.0).unwrap();
        let s0 = make_box_initial(&g, 1.0, 0.25, 0.75).unwrap();
        let rec = simulate(&b, &s0, 1.0, 1.0 / 128.0, 0).unwrap();
        assert!(rec.energies.iter().all(|e| e.is_finite() && *e >= 0.0));
    }
}
