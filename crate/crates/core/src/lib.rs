//! Order-reduced finite-difference (ORFD) semi-discretization of a clamped-free
//! three-layer Mead–Marcus sandwich beam, with the classical finite-difference
//! (FD) scheme as a baseline.
//!
//! The crate is organised bottom-up:
//!
//! * [`beam`]: layer data and the scalar coefficients `B`, `C`, `P`.
//! * [`grid`]: the uniform mesh and the nodal [`grid::BeamState`].
//! * [`linalg`]: tridiagonal LU and the dense nonsymmetric eigensolver.
//! * [`discretization`]: `A_h`, `M`, the shear solve and the assembled
//!   operator bundles for both schemes.
//! * [`spectral`]: closed-form eigenpairs and spectrum diagnostics.
//! * [`dynamics`]: energy, implicit-midpoint time stepping, trajectories and
//!   boundary observability certificates.

pub mod beam;
pub mod discretization;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod spectral;

pub use beam::{BeamCoefficients, LayerSpec, ShearCondition};
pub use discretization::{OperatorBundle, Scheme, ShearClosure};
pub use error::{Error, Result};
pub use grid::{BeamState, Grid};
