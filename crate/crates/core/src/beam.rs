//! Material data of the three-layer beam and the scalar model coefficients.
//!
//! The bending displacement `z` and the core shear angle `φ` obey
//!
//! ```text
//!   z_tt + z'''' − B φ' = 0,
//!   −C φ'' + P φ = −B z''',
//! ```
//!
//! with `B`, `C`, `P` computed from the layer data by
//! [`derive_coefficients`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Moduli are converted to this unit (GPa) before the coefficient formulas are
/// evaluated. `B` and `C` are invariant under a common rescaling of the moduli
/// but `P` scales inversely with the modulus unit; the reference values for
/// the PZT/rubber/aluminum stack are obtained with moduli in GPa.
pub const MODULUS_UNIT_PA: f64 = 1.0e9;

/// Default factor for the rescaled time `t* = time_scale · t`.
pub const DEFAULT_TIME_SCALE: f64 = 0.1;

/// One layer of the sandwich. All quantities in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    /// Mass density (kg/m³).
    pub rho: f64,
    /// Thickness (m).
    pub thickness: f64,
    /// Young's modulus (Pa).
    pub youngs: f64,
    /// Shear modulus (Pa).
    pub shear: f64,
    pub poisson: f64,
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("thickness", self.thickness),
            ("youngs", self.youngs),
            ("shear", self.shear),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(field, format!("must be positive, got {value}")));
            }
        }
        if !(self.poisson.is_finite() && (0.0..0.5).contains(&self.poisson)) {
            return Err(Error::invalid(
                "poisson",
                format!("must lie in [0, 0.5), got {}", self.poisson),
            ));
        }
        Ok(())
    }

    /// `D = E / (12 (1 − ν²))` with `E` in [`MODULUS_UNIT_PA`]; `D h³` is the
    /// flexural rigidity of the layer.
    pub fn flexural_modulus(&self) -> f64 {
        (self.youngs / MODULUS_UNIT_PA) / (12.0 * (1.0 - self.poisson * self.poisson))
    }
}

/// Top (PZT), core (silicone rubber) and bottom (aluminum) layers of the
/// reference stack.
pub fn reference_layers() -> [LayerSpec; 3] {
    let gpa = 1.0e9;
    [
        LayerSpec {
            rho: 7500.0,
            thickness: 0.01,
            youngs: 72.0 * gpa,
            shear: 27.0 * gpa,
            poisson: 0.31,
        },
        LayerSpec {
            rho: 1250.0,
            thickness: 0.03,
            youngs: 0.05 * gpa,
            shear: 0.01 * gpa,
            poisson: 0.47,
        },
        LayerSpec {
            rho: 2710.0,
            thickness: 0.01,
            youngs: 70.0 * gpa,
            shear: 25.0 * gpa,
            poisson: 0.33,
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamCoefficients {
    pub b: f64,
    pub c: f64,
    pub p: f64,
    pub time_scale: f64,
}

impl BeamCoefficients {
    pub fn new(b: f64, c: f64, p: f64) -> Result<Self> {
        let coeffs = BeamCoefficients {
            b,
            c,
            p,
            time_scale: DEFAULT_TIME_SCALE,
        };
        coeffs.validate()?;
        Ok(coeffs)
    }

    pub fn with_time_scale(mut self, time_scale: f64) -> Result<Self> {
        self.time_scale = time_scale;
        self.validate()?;
        Ok(self)
    }

    /// `B ≥ 0` is accepted so the decoupled beam (`B = 0`) can be studied;
    /// `C`, `P` and the time scale must be strictly positive.
    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.b >= 0.0) {
            return Err(Error::invalid("B", format!("must be non-negative, got {}", self.b)));
        }
        for (field, value) in [("C", self.c), ("P", self.p), ("time_scale", self.time_scale)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(field, format!("must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

/// Closed-form `B`, `C`, `P` of the three-layer model.
pub fn derive_coefficients(top: &LayerSpec, core: &LayerSpec, bottom: &LayerSpec) -> Result<BeamCoefficients> {
    top.validate()?;
    core.validate()?;
    bottom.validate()?;

    let (h1, h2, h3) = (top.thickness, core.thickness, bottom.thickness);
    let d1 = top.flexural_modulus();
    let d3 = bottom.flexural_modulus();
    let g2 = core.shear / MODULUS_UNIT_PA;
    let rigidity = d1 * h1.powi(3) + d3 * h3.powi(3);

    let b = g2 * (h1 + 2.0 * h2 + h3) / (2.0 * h2 * rigidity);
    let c = g2 / (h2 * rigidity);
    let p = g2 * (d1 * h1 + d3 * h3) / (12.0 * h2 * h2 * d1 * d3 * h1 * h3 * rigidity);

    BeamCoefficients::new(b, c, p)
}

/// Outcome of the large-shear test `(C/P − h²/4) − (5/2) B²/P ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearCondition {
    pub holds: bool,
    pub margin: f64,
}

/// Sufficient material condition for mesh-uniform boundary observability of
/// the ORFD scheme. A negative margin only withholds the certificate.
pub fn large_shear_condition(coeffs: &BeamCoefficients, h: f64) -> Result<ShearCondition> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::invalid("h", format!("must lie in (0, 1), got {h}")));
    }
    let BeamCoefficients { b, c, p, .. } = *coeffs;
    let margin = (c / p - 0.25 * h * h) - 2.5 * b * b / p;
    Ok(ShearCondition {
        holds: margin >= 0.0,
        margin,
    })
}

/// Observability constant of the continuous model, `(2/L)(T − 2c)` with
/// `c = max(L, L³/π²)`. Non-positive values mean no certified bound.
pub fn pde_observability_bound(horizon: f64, length: f64) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::invalid("T", format!("must be positive, got {horizon}")));
    }
    if !(length > 0.0) {
        return Err(Error::invalid("L", format!("must be positive, got {length}")));
    }
    let c = length.max(length.powi(3) / (std::f64::consts::PI * std::f64::consts::PI));
    Ok(2.0 / length * (horizon - 2.0 * c))
}
