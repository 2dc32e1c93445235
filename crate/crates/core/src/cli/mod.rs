//! Command-line front end: scenario files, subcommands and CSV output.

pub mod config;
mod emit;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{
    parse_config, parse_config_with_overrides, ConfigError, OutputSettings, ScenarioConfig,
    SweepSettings,
};

use crate::distill::distill;
use crate::error::QkdError;
use crate::montecarlo::{compare_with_analytic, simulate_link};
use crate::numerics::Bracket;
use crate::optimize::{
    compare_estimates, linspace, optimal_mu, optimal_mu_vs_distance, sweep_mu, sweep_surface, Axis,
};
use crate::params::{EntropyEstimator, PnsEstimator};

#[derive(Debug, Parser)]
#[command(
    name = "qkdrate",
    version,
    about = "Distilled key rate and optimal mean photon number for a fiber BB84 link"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file of `key = value` lines; unset keys use the preset.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV (needs --out).
    #[arg(long, global = true)]
    pub plot: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu_min: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu_max: Option<String>,
    #[arg(long, global = true)]
    pub mu_steps: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub dist_min: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub dist_max: Option<String>,
    #[arg(long, global = true)]
    pub dist_steps: Option<String>,
    /// Optimizer tolerance in μ.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<String>,
    /// Security parameter for both the entropy and multi-photon terms.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub confidence: Option<String>,
    /// Multi-photon estimator: original-bennett, revised-bennett, gilbert-hamrick.
    #[arg(long, global = true)]
    pub pns: Option<PnsEstimator>,
    /// Entropy estimator: bennett, slutsky, myers.
    #[arg(long, global = true)]
    pub entropy: Option<EntropyEstimator>,
    /// Pulse count for the Monte-Carlo run.
    #[arg(long, global = true)]
    pub pulses: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sifted rate, QBER and distilled rate for the configured link.
    Rate,
    /// Distilled rate across a μ grid.
    SweepMu,
    /// Distilled rate over a distance × μ grid.
    Surface,
    /// Optimal μ at the configured fiber length.
    OptimalMu,
    /// Optimal μ for each fiber length of the distance grid.
    OptimalMuCurve,
    /// Rate vs μ under each multi-photon estimator.
    CompareEstimates,
    /// Pulse-level simulation compared with the analytic sifted rate.
    Montecarlo,
}

#[derive(Debug)]
pub enum CliError {
    Config {
        path: Option<PathBuf>,
        error: ConfigError,
    },
    Model(QkdError),
    Io {
        path: Option<PathBuf>,
        error: std::io::Error,
    },
    Csv(csv::Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config {
                path: Some(p),
                error,
            } => write!(f, "{}: {error}", p.display()),
            CliError::Config { path: None, error } => write!(f, "command line: {error}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io {
                path: Some(p),
                error,
            } => write!(f, "{}: {error}", p.display()),
            CliError::Io { path: None, error } => write!(f, "{error}"),
            CliError::Csv(e) => write!(f, "csv: {e}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<QkdError> for CliError {
    fn from(e: QkdError) -> Self {
        CliError::Model(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(error: std::io::Error) -> Self {
        CliError::Io { path: None, error }
    }
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut o = Vec::new();
        let mut add = |key: &'static str, v: Option<String>| {
            if let Some(v) = v {
                o.push((key, v));
            }
        };
        add("seed", self.seed.map(|s| s.to_string()));
        add("muMin", self.mu_min.clone());
        add("muMax", self.mu_max.clone());
        add("muSteps", self.mu_steps.clone());
        add("distMin", self.dist_min.clone());
        add("distMax", self.dist_max.clone());
        add("distSteps", self.dist_steps.clone());
        add("tol", self.tol.clone());
        add("confidence", self.confidence.clone());
        add("pnsType", self.pns.map(|p| p.name().to_string()));
        add("estType", self.entropy.map(|e| e.name().to_string()));
        add("nPulses", self.pulses.clone());
        add("out", self.out.as_ref().map(|p| p.display().to_string()));
        if self.plot {
            add("plot", Some("true".to_string()));
        }
        o
    }

    /// Config file contents with command-line flags applied on top.
    pub fn scenario(&self) -> Result<ScenarioConfig, CliError> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path).map_err(|error| CliError::Io {
                path: Some(path.clone()),
                error,
            })?,
            None => String::new(),
        };
        let overrides = self.overrides();
        parse_config_with_overrides(&text, &overrides).map_err(|error| CliError::Config {
            path: if error.line == 0 {
                None
            } else {
                self.config.clone()
            },
            error,
        })
    }
}

/// Runs one invocation; tables and CSV without `--out` go to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let sc = cli.scenario()?;
    if sc.output.plot && sc.output.path.is_none() {
        return Err(CliError::Usage("--plot requires --out".to_string()));
    }
    let s = &sc.sweep;
    let bracket = Bracket::new(s.mu_lo, s.mu_hi)?;

    match cli.command {
        Command::Rate => {
            let b = distill(&sc.link, &sc.proto, &sc.eve)?;
            emit::rate_table(stdout, &sc, &b)?;
        }
        Command::SweepMu => {
            let grid = linspace(s.mu_min, s.mu_max, s.mu_steps);
            let curve = sweep_mu(&sc.link, &sc.proto, &sc.eve, &grid)?;
            if let Some(e) = curve.first_failure(Axis::MeanPhotonNumber) {
                return Err(e.into());
            }
            let table = emit::Table {
                header: vec!["mu", "rate"],
                rows: grid
                    .iter()
                    .zip(&curve.rates)
                    .map(|(mu, r)| vec![Some(*mu), *r])
                    .collect(),
            };
            emit::write_csv(
                stdout,
                &sc.output,
                &table,
                emit::PlotKind::Curves("mean photon number"),
            )?;
        }
        Command::Surface => {
            let mus = linspace(s.mu_min, s.mu_max, s.mu_steps);
            let kms = linspace(s.dist_min, s.dist_max, s.dist_steps);
            let surface = sweep_surface(&sc.link, &sc.proto, &sc.eve, &kms, &mus)?;
            if let Some((km, mu, e)) = surface.failures.first() {
                return Err(e.clone().at("mu", *mu).at("distance_km", *km).into());
            }
            let mut rows = Vec::with_capacity(kms.len() * mus.len());
            for (km, row) in kms.iter().zip(&surface.rates) {
                for (mu, r) in mus.iter().zip(row) {
                    rows.push(vec![Some(*km), Some(*mu), *r]);
                }
            }
            let table = emit::Table {
                header: vec!["distance_km", "mu", "rate"],
                rows,
            };
            emit::write_csv(stdout, &sc.output, &table, emit::PlotKind::Surface)?;
        }
        Command::OptimalMu => {
            let p = optimal_mu(&sc.link, &sc.proto, &sc.eve, bracket, s.tol)?;
            emit::optimum_table(stdout, &p)?;
        }
        Command::OptimalMuCurve => {
            let kms = linspace(s.dist_min, s.dist_max, s.dist_steps);
            let points =
                optimal_mu_vs_distance(&sc.link, &sc.proto, &sc.eve, &kms, bracket, s.tol)?;
            let table = emit::Table {
                header: vec!["distance_km", "mu_opt", "rate_opt"],
                rows: points
                    .iter()
                    .map(|p| vec![Some(p.distance), p.mu_opt, Some(p.rate_opt)])
                    .collect(),
            };
            emit::write_csv(
                stdout,
                &sc.output,
                &table,
                emit::PlotKind::Curves("fiber length (km)"),
            )?;
        }
        Command::CompareEstimates => {
            let grid = linspace(s.mu_min, s.mu_max, s.mu_steps);
            let curves = compare_estimates(&sc.link, &sc.proto, &sc.eve, &grid)?;
            for c in &curves {
                if let Some(e) = c.first_failure(Axis::MeanPhotonNumber) {
                    return Err(e.into());
                }
            }
            let table = emit::Table {
                header: vec!["mu", "rate_original", "rate_revised", "rate_gh"],
                rows: grid
                    .iter()
                    .enumerate()
                    .map(|(i, mu)| {
                        let mut row = vec![Some(*mu)];
                        row.extend(curves.iter().map(|c| c.rates[i]));
                        row
                    })
                    .collect(),
            };
            emit::write_csv(
                stdout,
                &sc.output,
                &table,
                emit::PlotKind::Curves("mean photon number"),
            )?;
        }
        Command::Montecarlo => {
            let sim = simulate_link(&sc.link, s.n_pulses, s.seed)?;
            let agreement = compare_with_analytic(&sim, &sc.link);
            emit::montecarlo_table(stdout, &sim, &agreement)?;
        }
    }
    Ok(())
}

/// Path of the gnuplot script written next to `csv`.
pub fn plot_script_path(csv: &Path) -> PathBuf {
    csv.with_extension("gp")
}
