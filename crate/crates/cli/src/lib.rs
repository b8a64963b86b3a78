//! Command-line experiments for the ORFD sandwich-beam model.

pub mod commands;
pub mod config;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<orfd_beam::Error> for CliError {
    fn from(e: orfd_beam::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "orfd-beam", version, about = "Sandwich-beam semi-discretization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficients B, C, P from the layer data, with the large-shear margin per grid.
    DeriveParams(CommonArgs),
    /// Eigenvalues of the first-order operator for every (scheme, N, xi).
    Spectrum(CommonArgs),
    /// Energy and tip-velocity trajectories for every (scheme, N, xi).
    Simulate(CommonArgs),
    /// Boundary observability certificates for the open-loop schemes.
    Observability(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML experiment file; built-in defaults are used without it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Grid sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Schemes, comma separated (orfd, fd).
    #[arg(long, value_delimiter = ',')]
    pub scheme: Vec<String>,
    /// Feedback gains, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub xi: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_final: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// Report times in physical units (`t / time_scale`).
    #[arg(long)]
    pub physical_time: bool,
    /// Any config key as KEY=VALUE with a TOML value; dotted keys reach into sections.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl CommonArgs {
    fn overrides(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut out = Vec::new();
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("--set expects KEY=VALUE, got '{item}'")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        let list = |v: Vec<String>| format!("[{}]", v.join(", "));
        if !self.n.is_empty() {
            out.push(("n".into(), list(self.n.iter().map(|x| x.to_string()).collect())));
        }
        if !self.scheme.is_empty() {
            out.push((
                "schemes".into(),
                list(self.scheme.iter().map(|s| format!("{s:?}")).collect()),
            ));
        }
        if !self.xi.is_empty() {
            out.push(("xi".into(), list(self.xi.iter().map(|x| format!("{x:?}")).collect())));
        }
        if let Some(t) = self.t_final {
            out.push(("t_final".into(), format!("{t:?}")));
        }
        if let Some(dt) = self.dt {
            out.push(("dt".into(), format!("{dt:?}")));
        }
        if let Some(seed) = self.seed {
            out.push(("seed".into(), seed.to_string()));
        }
        if self.physical_time {
            out.push(("physical_time".into(), "true".into()));
        }
        Ok(out)
    }

    /// Effective configuration after file, flags and overrides.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut config = ExperimentConfig::load(self.config.as_deref(), &self.overrides()?)?;
        if let Some(out) = &self.out {
            config.output = out.clone();
        }
        Ok(config)
    }
}

/// Runs one invocation; the returned text is printed on stdout.
pub fn run(cli: Cli) -> Result<String, CliError> {
    let (args, kind) = match &cli.command {
        Command::DeriveParams(a) => (a, commands::Kind::DeriveParams),
        Command::Spectrum(a) => (a, commands::Kind::Spectrum),
        Command::Simulate(a) => (a, commands::Kind::Simulate),
        Command::Observability(a) => (a, commands::Kind::Observability),
    };
    let config = args.resolve()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = args.workers {
        if k == 0 {
            return Err(CliError::Validation("--workers must be at least 1".into()));
        }
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    pool.install(|| commands::execute(kind, &config))
}
