//! The four experiments. Each writes its files under the output directory
//! and returns a short report for stdout.

use std::fmt::Write as _;
use std::path::Path;

use orfd_beam::beam::large_shear_condition;
use orfd_beam::dynamics::{
    make_box_initial, observability_certificate, random_initial, simulate, ObservabilityCertificate,
};
use orfd_beam::spectral::spectrum_report;
use orfd_beam::{BeamCoefficients, BeamState, Grid, OperatorBundle, Scheme};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{read_snapshot, CoefficientSource, ExperimentConfig, InitialConfig};
use crate::output::{ensure_dir, write_csv, write_json};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    DeriveParams,
    Spectrum,
    Simulate,
    Observability,
}

pub fn execute(kind: Kind, config: &ExperimentConfig) -> Result<String, CliError> {
    match kind {
        Kind::DeriveParams => derive_params(config),
        Kind::Spectrum => spectrum(config),
        Kind::Simulate => simulate_all(config),
        Kind::Observability => observability(config),
    }
}

#[derive(Debug, Serialize)]
struct CoefficientsOut {
    source: CoefficientSource,
    b: f64,
    c: f64,
    p: f64,
    time_scale: f64,
}

impl CoefficientsOut {
    fn new(c: &BeamCoefficients, source: CoefficientSource) -> Self {
        CoefficientsOut {
            source,
            b: c.b,
            c: c.c,
            p: c.p,
            time_scale: c.time_scale,
        }
    }
}

/// `xi` as it appears in file names: shortest round-trip decimal.
pub fn xi_label(xi: f64) -> String {
    xi.to_string()
}

pub fn spectrum_file_name(scheme: Scheme, n: usize, xi: f64) -> String {
    format!("{}-{}-{}.csv", scheme.name(), n, xi_label(xi))
}

pub fn trajectory_file_name(scheme: Scheme, n: usize, xi: f64) -> String {
    format!("trajectory-{}-{}-{}.csv", scheme.name(), n, xi_label(xi))
}

fn sweep(config: &ExperimentConfig) -> Vec<(Scheme, usize, f64)> {
    let mut items = Vec::new();
    for &scheme in &config.schemes {
        for &n in &config.n {
            for &xi in &config.xi {
                items.push((scheme, n, xi));
            }
        }
    }
    items
}

#[derive(Debug, Serialize)]
struct ShearMargin {
    n: usize,
    h: f64,
    margin: f64,
    holds: bool,
}

#[derive(Debug, Serialize)]
struct ParamsOut {
    command: &'static str,
    seed: u64,
    coefficients: CoefficientsOut,
    large_shear: Vec<ShearMargin>,
}

fn derive_params(config: &ExperimentConfig) -> Result<String, CliError> {
    let (coeffs, source) = config.coefficients()?;
    let mut large_shear = Vec::new();
    for &n in &config.n {
        let grid = Grid::new(n)?;
        let cond = large_shear_condition(&coeffs, grid.h())?;
        large_shear.push(ShearMargin {
            n,
            h: grid.h(),
            margin: cond.margin,
            holds: cond.holds,
        });
    }
    let out = ParamsOut {
        command: "derive-params",
        seed: config.seed,
        coefficients: CoefficientsOut::new(&coeffs, source),
        large_shear,
    };
    ensure_dir(&config.output)?;
    write_json(&config.output.join("params.json"), &out)?;
    Ok(serde_json::to_string_pretty(&out).expect("serializable") + "\n")
}

#[derive(Debug, Serialize)]
struct SpectrumItem {
    scheme: Scheme,
    n: usize,
    xi: f64,
    file: Option<String>,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    eigenvalue_count: usize,
    min_gap: Option<f64>,
    top_gap: Option<f64>,
    max_real: Option<f64>,
    spectral_radius: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SpectrumSummary {
    command: &'static str,
    seed: u64,
    coefficients: CoefficientsOut,
    results: Vec<SpectrumItem>,
}

fn spectrum(config: &ExperimentConfig) -> Result<String, CliError> {
    config.validate_sweep()?;
    let (coeffs, source) = config.coefficients()?;
    ensure_dir(&config.output)?;
    let out_dir = config.output.as_path();
    let results: Vec<(SpectrumItem, Option<CliError>)> = sweep(config)
        .into_par_iter()
        .map(|(scheme, n, xi)| spectrum_one(out_dir, &coeffs, scheme, n, xi))
        .collect();

    let mut failure: Option<CliError> = None;
    let mut report = String::new();
    let mut items = Vec::new();
    for (item, err) in results {
        match &item.min_gap {
            Some(gap) => writeln!(
                report,
                "{} N={} xi={}: min_gap={:?} max_real={:?}",
                item.scheme,
                item.n,
                item.xi,
                gap,
                item.max_real.unwrap_or(f64::NAN)
            ),
            None => writeln!(
                report,
                "{} N={} xi={}: failed: {}",
                item.scheme,
                item.n,
                item.xi,
                item.error.as_deref().unwrap_or("")
            ),
        }
        .expect("string write");
        if let Some(e) = err {
            // Numerical failures dominate the exit code.
            if failure.as_ref().is_none_or(|f| f.exit_code() < e.exit_code()) {
                failure = Some(e);
            }
        }
        items.push(item);
    }
    let summary = SpectrumSummary {
        command: "spectrum",
        seed: config.seed,
        coefficients: CoefficientsOut::new(&coeffs, source),
        results: items,
    };
    write_json(&out_dir.join("spectrum-summary.json"), &summary)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

fn spectrum_one(
    dir: &Path,
    coeffs: &BeamCoefficients,
    scheme: Scheme,
    n: usize,
    xi: f64,
) -> (SpectrumItem, Option<CliError>) {
    let attempt = || -> Result<_, CliError> {
        let grid = Grid::new(n)?;
        let bundle = OperatorBundle::assemble(scheme, coeffs, &grid, xi)?;
        let report = spectrum_report(&bundle)?;
        let name = spectrum_file_name(scheme, n, xi);
        write_csv(
            &dir.join(&name),
            &["re".to_string(), "im".to_string()],
            report.eigenvalues.iter().map(|z| [z.re, z.im]),
        )?;
        Ok((report, name))
    };
    match attempt() {
        Ok((r, name)) => (
            SpectrumItem {
                scheme,
                n,
                xi,
                file: Some(name),
                status: "ok",
                error: None,
                eigenvalue_count: r.eigenvalues.len(),
                min_gap: Some(r.min_gap),
                top_gap: Some(r.top_gap),
                max_real: Some(r.max_real),
                spectral_radius: Some(r.spectral_radius),
            },
            None,
        ),
        Err(e) => (
            SpectrumItem {
                scheme,
                n,
                xi,
                file: None,
                status: "error",
                error: Some(e.to_string()),
                eigenvalue_count: 0,
                min_gap: None,
                top_gap: None,
                max_real: None,
                spectral_radius: None,
            },
            Some(e),
        ),
    }
}

/// Initial state for draw `draw` on `grid`.
fn initial_state(config: &ExperimentConfig, grid: &Grid, draw: u64) -> Result<BeamState, CliError> {
    match &config.initial {
        InitialConfig::Box { amplitude, a, b } => Ok(make_box_initial(grid, *amplitude, *a, *b)?),
        InitialConfig::Random { amplitude, .. } => {
            if !amplitude.is_finite() {
                return Err(CliError::Validation("initial.amplitude must be finite".into()));
            }
            Ok(random_initial(grid, *amplitude, config.seed.wrapping_add(draw)))
        }
        InitialConfig::Snapshot { path } => {
            let state = read_snapshot(path)?;
            state
                .check(grid)
                .map_err(|e| CliError::Validation(format!("snapshot {} on N = {}: {e}", path.display(), grid.n())))?;
            Ok(state)
        }
    }
}

fn draw_count(config: &ExperimentConfig) -> u64 {
    match config.initial {
        InitialConfig::Random { draws, .. } => draws,
        _ => 1,
    }
}

#[derive(Debug, Serialize)]
struct TrajectoryItem {
    scheme: Scheme,
    n: usize,
    xi: f64,
    file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    snapshot_file: Option<String>,
    dt: f64,
    steps: usize,
    initial_energy: f64,
    final_energy: f64,
    energy_ratio: f64,
    max_sensor: f64,
}

#[derive(Debug, Serialize)]
struct SimulateSummary {
    command: &'static str,
    seed: u64,
    t_final: f64,
    physical_time: bool,
    coefficients: CoefficientsOut,
    results: Vec<TrajectoryItem>,
}

fn simulate_all(config: &ExperimentConfig) -> Result<String, CliError> {
    config.validate_sweep()?;
    config.validate_time()?;
    let (coeffs, source) = config.coefficients()?;
    // Initial data problems surface before any integration starts.
    for &n in &config.n {
        initial_state(config, &Grid::new(n)?, 0)?;
    }
    ensure_dir(&config.output)?;
    let results: Vec<Result<TrajectoryItem, CliError>> = sweep(config)
        .into_par_iter()
        .map(|(scheme, n, xi)| simulate_one(config, &coeffs, scheme, n, xi))
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut report = String::new();
    for r in &results {
        writeln!(
            report,
            "{} N={} xi={}: energy_ratio={:?} max_sensor={:?}",
            r.scheme, r.n, r.xi, r.energy_ratio, r.max_sensor
        )
        .expect("string write");
    }
    let summary = SimulateSummary {
        command: "simulate",
        seed: config.seed,
        t_final: config.t_final,
        physical_time: config.physical_time,
        coefficients: CoefficientsOut::new(&coeffs, source),
        results,
    };
    write_json(&config.output.join("simulate-summary.json"), &summary)?;
    Ok(report)
}

fn simulate_one(
    config: &ExperimentConfig,
    coeffs: &BeamCoefficients,
    scheme: Scheme,
    n: usize,
    xi: f64,
) -> Result<TrajectoryItem, CliError> {
    let grid = Grid::new(n)?;
    let bundle = OperatorBundle::assemble(scheme, coeffs, &grid, xi)?;
    let initial = initial_state(config, &grid, 0)?;
    let rec = simulate(
        &bundle,
        &initial,
        config.t_final,
        config.effective_dt(),
        config.snapshot_stride,
    )?;
    let time = |t: f64| if config.physical_time { t / coeffs.time_scale } else { t };

    let file = trajectory_file_name(scheme, n, xi);
    write_csv(
        &config.output.join(&file),
        &["t", "energy", "sensor"].map(String::from),
        rec.times
            .iter()
            .zip(&rec.energies)
            .zip(&rec.sensor)
            .map(|((t, e), s)| [time(*t), *e, *s]),
    )?;
    let snapshot_file = if config.snapshot_stride > 0 {
        let name = format!("snapshots-{}-{}-{}.csv", scheme.name(), n, xi_label(xi));
        let mut header = vec!["t".to_string()];
        header.extend((0..grid.node_count()).map(|i| format!("z{i}")));
        write_csv(
            &config.output.join(&name),
            &header,
            rec.snapshots.iter().map(|s| {
                let mut row = vec![time(s.t)];
                row.extend_from_slice(&s.z);
                row
            }),
        )?;
        Some(name)
    } else {
        None
    };
    Ok(TrajectoryItem {
        scheme,
        n,
        xi,
        file,
        snapshot_file,
        dt: rec.dt,
        steps: rec.times.len() - 1,
        initial_energy: rec.initial_energy(),
        final_energy: rec.final_energy(),
        energy_ratio: rec.energy_ratio(),
        max_sensor: rec.max_sensor(),
    })
}

#[derive(Debug, Serialize)]
struct CertificateOut {
    draw: u64,
    seed: u64,
    #[serde(flatten)]
    certificate: ObservabilityCertificate,
}

#[derive(Debug, Serialize)]
struct CertificateFile {
    scheme: Scheme,
    n: usize,
    certificates: Vec<CertificateOut>,
}

#[derive(Debug, Serialize)]
struct ObservabilityGroup {
    scheme: Scheme,
    n: usize,
    file: String,
    draws: u64,
    satisfied: u64,
    condition_margin: f64,
    condition_holds: bool,
    min_ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ObservabilitySummary {
    command: &'static str,
    seed: u64,
    t_final: f64,
    coefficients: CoefficientsOut,
    all_satisfied: bool,
    results: Vec<ObservabilityGroup>,
}

fn observability(config: &ExperimentConfig) -> Result<String, CliError> {
    config.validate_sweep()?;
    config.validate_time()?;
    if config.xi.iter().any(|&x| x != 0.0) {
        return Err(CliError::Validation(
            "observability requires the open-loop system: set xi = [0]".into(),
        ));
    }
    if !(config.t_final > 6.0) {
        return Err(CliError::Validation(format!(
            "observability requires t_final > 6, got {}",
            config.t_final
        )));
    }
    let (coeffs, source) = config.coefficients()?;
    for &n in &config.n {
        initial_state(config, &Grid::new(n)?, 0)?;
    }
    ensure_dir(&config.output)?;
    let draws = draw_count(config);

    let mut jobs = Vec::new();
    for &scheme in &config.schemes {
        for &n in &config.n {
            for d in 0..draws {
                jobs.push((scheme, n, d));
            }
        }
    }
    let certs: Vec<Result<CertificateOut, CliError>> = jobs
        .into_par_iter()
        .map(|(scheme, n, d)| {
            let grid = Grid::new(n)?;
            let bundle = OperatorBundle::assemble(scheme, &coeffs, &grid, 0.0)?;
            let initial = initial_state(config, &grid, d)?;
            let certificate = observability_certificate(&bundle, &initial, config.t_final, config.effective_dt())?;
            Ok(CertificateOut {
                draw: d,
                seed: config.seed.wrapping_add(d),
                certificate,
            })
        })
        .collect();
    let mut certs = certs.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter();

    let mut groups = Vec::new();
    let mut report = String::new();
    for &scheme in &config.schemes {
        for &n in &config.n {
            let list: Vec<CertificateOut> = certs.by_ref().take(draws as usize).collect();
            let satisfied = list.iter().filter(|c| c.certificate.satisfied).count() as u64;
            let min_ratio = list
                .iter()
                .filter(|c| c.certificate.theorem_bound > 0.0)
                .map(|c| c.certificate.integral / c.certificate.theorem_bound)
                .reduce(f64::min);
            let first = &list[0].certificate;
            let file = format!("observability-{}-{}.json", scheme.name(), n);
            writeln!(
                report,
                "{} N={}: {}/{} satisfied, condition margin {}",
                scheme, n, satisfied, draws, first.condition_margin
            )
            .expect("string write");
            for c in list.iter().filter(|c| !c.certificate.satisfied) {
                writeln!(
                    report,
                    "  draw {}: integral {} < bound {} (quadrature error {})",
                    c.draw, c.certificate.integral, c.certificate.theorem_bound, c.certificate.quadrature_error
                )
                .expect("string write");
            }
            groups.push(ObservabilityGroup {
                scheme,
                n,
                file: file.clone(),
                draws,
                satisfied,
                condition_margin: first.condition_margin,
                condition_holds: first.condition_holds,
                min_ratio,
            });
            write_json(
                &config.output.join(&file),
                &CertificateFile {
                    scheme,
                    n,
                    certificates: list,
                },
            )?;
        }
    }
    let summary = ObservabilitySummary {
        command: "observability",
        seed: config.seed,
        t_final: config.t_final,
        coefficients: CoefficientsOut::new(&coeffs, source),
        all_satisfied: groups.iter().all(|g| g.satisfied == g.draws),
        results: groups,
    };
    write_json(&config.output.join("observability-summary.json"), &summary)?;
    Ok(report)
}
