//! Uniform mesh on `[0, 1]` and nodal beam states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest interior node count accepted by the assembly routines; the
/// fourth-difference stencils need two neighbours on each side after ghost
/// elimination.
pub const MIN_INTERIOR_NODES: usize = 3;

/// `N` interior nodes, mesh size `h = 1/(N+1)`, nodes `x_i = i h` for
/// `i = 0..=N+1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_INTERIOR_NODES {
            return Err(Error::invalid(
                "N",
                format!("need at least {MIN_INTERIOR_NODES} interior nodes, got {n}"),
            ));
        }
        Ok(Self::new_unchecked(n))
    }

    /// Skips the stencil-width guard. Only the closed-form eigenpairs and
    /// single-stencil checks are meaningful for `N < 3`.
    pub fn new_unchecked(n: usize) -> Self {
        assert!(n >= 1, "grid needs at least one interior node");
        Grid {
            n,
            h: 1.0 / (n as f64 + 1.0),
        }
    }

    /// Interior node count `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of free unknowns `z_1..z_{N+1}`.
    pub fn free_len(&self) -> usize {
        self.n + 1
    }

    pub fn node_count(&self) -> usize {
        self.n + 2
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n + 1 {
            1.0
        } else {
            i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.node_count()).map(|i| self.x(i)).collect()
    }
}

/// Displacements and velocities at all nodes `0..=N+1` at time `t`.
/// The clamped node carries `z_0 = ż_0 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamState {
    pub z: Vec<f64>,
    pub zdot: Vec<f64>,
    pub t: f64,
}

impl BeamState {
    pub fn zeros(grid: &Grid) -> Self {
        BeamState {
            z: vec![0.0; grid.node_count()],
            zdot: vec![0.0; grid.node_count()],
            t: 0.0,
        }
    }

    /// Builds a state from the free unknowns `z_1..z_{N+1}`.
    pub fn from_free(z_free: &[f64], zdot_free: &[f64], t: f64) -> Self {
        debug_assert_eq!(z_free.len(), zdot_free.len());
        let mut z = Vec::with_capacity(z_free.len() + 1);
        z.push(0.0);
        z.extend_from_slice(z_free);
        let mut zdot = Vec::with_capacity(zdot_free.len() + 1);
        zdot.push(0.0);
        zdot.extend_from_slice(zdot_free);
        BeamState { z, zdot, t }
    }

    pub fn z_free(&self) -> &[f64] {
        &self.z[1..]
    }

    pub fn zdot_free(&self) -> &[f64] {
        &self.zdot[1..]
    }

    /// Tip velocity `ż_{N+1}`, the boundary sensor reading.
    pub fn tip_velocity(&self) -> f64 {
        *self.zdot.last().expect("state has nodes")
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        let expected = grid.node_count();
        for len in [self.z.len(), self.zdot.len()] {
            if len != expected {
                return Err(Error::Dimension { expected, got: len });
            }
        }
        if self.z[0] != 0.0 || self.zdot[0] != 0.0 {
            return Err(Error::invalid("state", "clamped node must have z_0 = ż_0 = 0"));
        }
        Ok(())
    }
}
