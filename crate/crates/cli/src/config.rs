//! Experiment configuration: a TOML document with flat top-level keys, a
//! model section (`[layers]` or `[coefficients]`) and an `[initial]` section.

use std::path::{Path, PathBuf};

use orfd_beam::beam::{derive_coefficients, reference_layers, DEFAULT_TIME_SCALE, MODULUS_UNIT_PA};
use orfd_beam::{BeamCoefficients, LayerSpec, Scheme};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default = "default_n")]
    pub n: Vec<usize>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_xi")]
    pub xi: Vec<f64>,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    /// Defaults to `t_final / 4096`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub snapshot_stride: usize,
    #[serde(default = "default_time_scale")]
    pub time_scale: f64,
    /// Report times as `t / time_scale` instead of the rescaled time.
    #[serde(default)]
    pub physical_time: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<LayersConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientsConfig>,
    #[serde(default)]
    pub initial: InitialConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayersConfig {
    pub top: LayerConfig,
    pub core: LayerConfig,
    pub bottom: LayerConfig,
}

/// Layer data as written in config files: moduli in GPa, everything else SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub rho: f64,
    pub thickness: f64,
    pub youngs_gpa: f64,
    pub shear_gpa: f64,
    pub poisson: f64,
}

impl LayerConfig {
    pub fn to_spec(self) -> LayerSpec {
        LayerSpec {
            rho: self.rho,
            thickness: self.thickness,
            youngs: self.youngs_gpa * MODULUS_UNIT_PA,
            shear: self.shear_gpa * MODULUS_UNIT_PA,
            poisson: self.poisson,
        }
    }

    fn from_spec(s: &LayerSpec) -> Self {
        LayerConfig {
            rho: s.rho,
            thickness: s.thickness,
            youngs_gpa: s.youngs / MODULUS_UNIT_PA,
            shear_gpa: s.shear / MODULUS_UNIT_PA,
            poisson: s.poisson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsConfig {
    pub b: f64,
    pub c: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialConfig {
    /// `z_i = ż_i = amplitude` for `a ≤ x_i ≤ b`.
    Box { amplitude: f64, a: f64, b: f64 },
    /// Uniform draws in `[-amplitude, amplitude]`; draw `d` uses `seed + d`.
    Random {
        amplitude: f64,
        #[serde(default = "default_draws")]
        draws: u64,
    },
    /// CSV with header `x,z,zdot` and one row per node `0..=N+1`.
    Snapshot { path: PathBuf },
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig::Box {
            amplitude: 1e-3,
            a: 0.25,
            b: 0.75,
        }
    }
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}
fn default_n() -> Vec<usize> {
    vec![20]
}
fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::Orfd]
}
fn default_xi() -> Vec<f64> {
    vec![0.0]
}
fn default_t_final() -> f64 {
    10.0
}
fn default_time_scale() -> f64 {
    DEFAULT_TIME_SCALE
}
fn default_draws() -> u64 {
    1
}

impl Default for ExperimentConfig {
    /// The reference three-layer stack with box initial data.
    fn default() -> Self {
        let [top, core, bottom] = reference_layers();
        ExperimentConfig {
            seed: 0,
            output: default_output(),
            n: default_n(),
            schemes: default_schemes(),
            xi: default_xi(),
            t_final: default_t_final(),
            dt: None,
            snapshot_stride: 0,
            time_scale: default_time_scale(),
            physical_time: false,
            layers: Some(LayersConfig {
                top: LayerConfig::from_spec(&top),
                core: LayerConfig::from_spec(&core),
                bottom: LayerConfig::from_spec(&bottom),
            }),
            coefficients: None,
            initial: InitialConfig::default(),
        }
    }
}

/// Where the coefficients came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientSource {
    Layers,
    Coefficients,
}

impl ExperimentConfig {
    /// Parses a TOML document, applies `key=value` overrides (dotted keys,
    /// TOML values) and deserializes. Without a document the built-in
    /// defaults are the starting point.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut doc: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", p.display())))?;
                text.parse()
                    .map_err(|e| CliError::Validation(format!("config {}: {e}", p.display())))?
            }
            None => {
                let mut doc = toml::Table::try_from(ExperimentConfig::default()).expect("default config serializes");
                // Coefficients given on the command line replace the default layer stack.
                if overrides
                    .iter()
                    .any(|(k, _)| k.split('.').next() == Some("coefficients"))
                {
                    doc.remove("layers");
                }
                doc
            }
        };
        for (key, value) in overrides {
            apply_override(&mut doc, key, value)?;
        }
        let config: ExperimentConfig = doc
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Validation(format!("config: {}", e.message())))?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn effective_dt(&self) -> f64 {
        self.dt.unwrap_or(self.t_final / 4096.0)
    }

    pub fn coefficients(&self) -> Result<(BeamCoefficients, CoefficientSource), CliError> {
        let (coeffs, source) = match (&self.layers, &self.coefficients) {
            (Some(_), Some(_)) => {
                return Err(CliError::Validation(
                    "config gives both [layers] and [coefficients]; keep exactly one".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Validation(
                    "config needs either [layers] or [coefficients]".into(),
                ))
            }
            (Some(l), None) => (
                derive_coefficients(&l.top.to_spec(), &l.core.to_spec(), &l.bottom.to_spec())?,
                CoefficientSource::Layers,
            ),
            (None, Some(c)) => (BeamCoefficients::new(c.b, c.c, c.p)?, CoefficientSource::Coefficients),
        };
        Ok((coeffs.with_time_scale(self.time_scale)?, source))
    }

    /// Checks shared by every experiment that sweeps grids and schemes.
    pub fn validate_sweep(&self) -> Result<(), CliError> {
        if self.n.is_empty() {
            return Err(CliError::Validation("n must list at least one grid size".into()));
        }
        if let Some(&bad) = self.n.iter().find(|&&n| n < orfd_beam::grid::MIN_INTERIOR_NODES) {
            return Err(CliError::Validation(format!(
                "n = {bad} is below the minimum of {} interior nodes",
                orfd_beam::grid::MIN_INTERIOR_NODES
            )));
        }
        if self.schemes.is_empty() {
            return Err(CliError::Validation("schemes must list at least one scheme".into()));
        }
        if self.xi.is_empty() {
            return Err(CliError::Validation("xi must list at least one gain".into()));
        }
        if let Some(bad) = self.xi.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(CliError::Validation(format!(
                "xi = {bad} must be finite and non-negative"
            )));
        }
        if let InitialConfig::Random { draws: 0, .. } = self.initial {
            return Err(CliError::Validation("initial.draws must be at least 1".into()));
        }
        if !(self.time_scale > 0.0 && self.time_scale.is_finite()) {
            return Err(CliError::Validation(format!(
                "time_scale = {} must be positive",
                self.time_scale
            )));
        }
        Ok(())
    }

    pub fn validate_time(&self) -> Result<(), CliError> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(CliError::Validation(format!(
                "t_final = {} must be positive",
                self.t_final
            )));
        }
        let dt = self.effective_dt();
        if !(dt > 0.0 && dt <= self.t_final) {
            return Err(CliError::Validation(format!(
                "dt = {dt} must satisfy 0 < dt <= t_final"
            )));
        }
        Ok(())
    }
}

fn apply_override(doc: &mut toml::Table, key: &str, raw: &str) -> Result<(), CliError> {
    let value = parse_value(raw);
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| CliError::Validation(format!("override key '{key}' is empty")))?;
    let mut table = doc;
    for part in parts {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Validation(format!("override key '{key}': '{part}' is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

/// A TOML value if `raw` parses as one, otherwise the raw text as a string.
fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Parses the `x,z,zdot` snapshot format.
pub fn read_snapshot(path: &Path) -> Result<orfd_beam::BeamState, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Validation(format!("cannot read snapshot {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Validation(format!("snapshot {}: {e}", path.display())))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "z", "zdot"] {
        return Err(CliError::Validation(format!(
            "snapshot {} must have header x,z,zdot",
            path.display()
        )));
    }
    let mut z = Vec::new();
    let mut zdot = Vec::new();
    for (row, record) in reader.deserialize::<(f64, f64, f64)>().enumerate() {
        let (_, zi, zdi) =
            record.map_err(|e| CliError::Validation(format!("snapshot {} row {}: {e}", path.display(), row + 1)))?;
        z.push(zi);
        zdot.push(zdi);
    }
    Ok(orfd_beam::BeamState { z, zdot, t: 0.0 })
}
