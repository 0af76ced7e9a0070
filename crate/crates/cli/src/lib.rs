//! Command-line experiment runner.
//!
//! Each figure command writes one or more CSV tables (and SVG plots unless disabled)
//! to the output directory. `validate` cross-checks the analytic results and exits
//! with status 1 if any tolerance fails.

pub mod config;
pub mod experiments;
pub mod output;
pub mod validate;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::experiments::Artifacts;
use crate::output::{write_svg, write_table, Metadata};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Config(String),
    Validation(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cogjam_core::Error> for CliError {
    fn from(e: cogjam_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Validation(_) | CliError::Runtime(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cogjam", version, about = "Spectrum-access throughput under belief-manipulation jamming")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the configured number of Monte Carlo replications.
    #[arg(long, global = true)]
    pub replications: Option<usize>,
    /// Write CSV only.
    #[arg(long, global = true)]
    pub no_plots: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Two-channel myopic vs optimized softmax throughput over the attack probability.
    Figure3,
    /// Two-channel performance and robustness against the policy entropy.
    Figure4,
    /// Myopic vs Boltzmann throughput on 4 and 10 identical channels.
    Figure56,
    /// Defender throughput under the four attack strategies.
    Figure7,
    /// Optimal Boltzmann temperature over the attack probability.
    Figure8,
    /// Attacker detection cost over the attack probability.
    Figure9,
    /// Monte Carlo grid over channel count, attack probability and temperature.
    Sweep,
    /// Cross-check closed forms, simulation and solvers.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Figure3 => "figure3",
            Command::Figure4 => "figure4",
            Command::Figure56 => "figure56",
            Command::Figure7 => "figure7",
            Command::Figure8 => "figure8",
            Command::Figure9 => "figure9",
            Command::Sweep => "sweep",
            Command::Validate => "validate",
        }
    }
}

/// Loads the configuration and applies the command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.experiment.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    if let Some(r) = cli.replications {
        config.sim.replications = r;
    }
    if cli.no_plots {
        config.output.plots = false;
    }
    config.validate()?;
    Ok(config)
}

/// Runs one command and returns the paths it wrote.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let config = resolve_config(cli)?;
    let meta = Metadata { command: cli.command.name().into(), config_sha256: config.sha256(), seed: config.experiment.seed };
    let mut failed = None;
    let artifacts = match cli.command {
        Command::Figure3 => experiments::figure3(&config)?,
        Command::Figure4 => experiments::figure4(&config)?,
        Command::Figure56 => experiments::figure56(&config)?,
        Command::Figure7 => experiments::figure7(&config)?,
        Command::Figure8 => experiments::figure8(&config)?,
        Command::Figure9 => experiments::figure9(&config)?,
        Command::Sweep => experiments::sweep(&config)?,
        Command::Validate => {
            let report = validate::run(&config)?;
            for c in &report.checks {
                let status = format!("{:?}", c.status).to_uppercase();
                println!("{status:<5} {} value={} reference={} tol={} {}", c.name, c.value, c.reference, c.tolerance, c.note);
            }
            let bad: Vec<&str> =
                report.checks.iter().filter(|c| c.status == validate::Status::Fail).map(|c| c.name.as_str()).collect();
            if !bad.is_empty() {
                failed = Some(bad.join(", "));
            }
            Artifacts { tables: vec![report.table()], plots: Vec::new() }
        }
    };
    let mut written = Vec::new();
    for t in &artifacts.tables {
        written.push(write_table(&config.output.dir, t, &meta)?);
    }
    if config.output.plots {
        for (name, svg) in &artifacts.plots {
            written.push(write_svg(&config.output.dir, name, svg)?);
        }
    }
    match failed {
        Some(names) => Err(CliError::Validation(names)),
        None => Ok(written),
    }
}
