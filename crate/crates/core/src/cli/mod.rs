//! Command-line driver.

pub mod commands;
pub mod config;
pub mod pgm;
pub mod report;
pub mod scenarios;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::fractal::EstimateError;
use crate::ratmap::MapError;
use crate::semigroup::SemigroupError;
use crate::topology::TopologyError;
pub use config::{GeneratorSpec, JobConfig};
pub use report::{Check, RhEntry, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot write output: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::InvalidParams(m) => CliError::Config(m),
            e => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<MapError> for CliError {
    fn from(e: MapError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<SemigroupError> for CliError {
    fn from(e: SemigroupError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<TopologyError> for CliError {
    fn from(e: TopologyError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "invdyn", version, about = "Julia sets and invariant sets of rational semigroups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON job configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Estimator seed, overriding `estimator.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid size, overriding `grid_n`.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Worker threads, overriding `workers`.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rasterize J(G) to julia.pgm.
    EstimateJulia,
    /// Estimate E(G) and label the components of its complement.
    EstimateInvariant,
    /// Label the complement of a stored mask, or of a fresh estimate of E(G).
    Components {
        /// Mask image written by estimate-invariant.
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Run a built-in scenario and print its checks.
    Verify {
        #[arg(value_parser = scenarios::VERIFY_SCENARIOS)]
        scenario: String,
    },
    /// Riemann-Hurwitz deficiencies of the generators and their pairwise compositions.
    RhCheck,
}

impl Cli {
    /// The job configuration with command-line overrides applied.
    pub fn job(&self) -> Result<JobConfig, CliError> {
        let mut cfg = match (&self.command, &self.config) {
            (Command::Verify { scenario }, path) => {
                let mut base = scenarios::builtin(scenario)
                    .ok_or_else(|| CliError::Config(format!("unknown scenario {scenario:?}")))?;
                if let Some(path) = path {
                    let c = JobConfig::load(path)?;
                    base = JobConfig {
                        scenario: base.scenario,
                        generators: base.generators,
                        ..c
                    };
                }
                base
            }
            (_, Some(path)) => JobConfig::load(path)?,
            (_, None) => return Err(CliError::Config("--config is required".into())),
        };
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.estimator.seed = seed;
        }
        if let Some(n) = self.grid {
            cfg.grid_n = n;
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        Ok(cfg)
    }
}

fn execute(cli: &Cli, cfg: &JobConfig) -> Result<RunReport, CliError> {
    match &cli.command {
        Command::EstimateJulia => commands::estimate_julia(cfg),
        Command::EstimateInvariant => commands::estimate_invariant(cfg),
        Command::Components { mask } => {
            let stored = match mask {
                Some(path) => {
                    let bytes = fs::read(path)
                        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                    Some(pgm::decode_mask(&bytes, cfg.overlap).map_err(|e| {
                        CliError::Config(format!("{}: {e}", path.display()))
                    })?)
                }
                None => None,
            };
            commands::components(cfg, stored)
        }
        Command::Verify { scenario } => scenarios::verify(scenario, cfg),
        Command::RhCheck => commands::rh_check(cfg),
    }
}

fn print_checks(report: &RunReport) {
    for c in &report.checks {
        println!(
            "{:<5} {:<32} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
}

/// Runs one job and writes `report.json`. Returns the report and the exit code.
pub fn run(cli: &Cli) -> Result<(RunReport, i32), CliError> {
    let cfg = cli.job()?;
    cfg.semigroup()?;
    let start = Instant::now();
    let job = || execute(cli, &cfg);
    let mut report = match cfg.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(job)?,
        None => job()?,
    };
    report.runtime_seconds = start.elapsed().as_secs_f64();
    let verifying = matches!(cli.command, Command::Verify { .. } | Command::RhCheck);
    if verifying {
        print_checks(&report);
    }
    pgm::write_atomic(&cfg.output_dir.join("report.json"), report.to_json().as_bytes())
        .map_err(|e| CliError::Io(format!("report.json: {e}")))?;
    let code = report_code(&report);
    Ok((report, code))
}

/// Exit code of a completed run: failing checks give `EXIT_VERIFY_FAILED`.
pub fn report_code(report: &RunReport) -> i32 {
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

/// Parses arguments, runs the job and maps every outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok((_, code)) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
