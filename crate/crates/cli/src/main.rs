//! Batch front end: configuration, dispatch, and deterministic JSON/CSV
//! emission for the cantilever beam toolkit.
//!
//! Exit codes: 0 on success, 1 on mathematical failure (a failing
//! certificate or a non-converged run), 2 on usage or configuration errors.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cantilever_core::error::Error;
use config::RunConfig;
use output::Emitter;

#[derive(Parser)]
#[command(
    name = "cantilever",
    version,
    about = "Fourth-order cantilever boundary value problem: solvers, certificates, critical-point search"
)]
struct Cli {
    /// Structured configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Built-in example configuration (paper-3-3, paper-3-9).
    #[arg(long, global = true)]
    example: Option<String>,

    /// Output directory for JSON/CSV artifacts.
    #[arg(long, global = true)]
    out: Option<String>,

    /// Grid panels (power of two between 32 and 4096).
    #[arg(long, global = true)]
    panels: Option<usize>,

    /// Primary tolerance of the chosen command.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for multi-start randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Emit JSON only (unless --csv is also given).
    #[arg(long, global = true)]
    json: bool,

    /// Emit CSV only (unless --json is also given).
    #[arg(long, global = true)]
    csv: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the existence/multiplicity hypotheses for the configured
    /// nonlinearity and shell.
    Certify,
    /// Solve the integral equation by the configured method.
    Solve,
    /// Minimize the energy over the conical shell.
    Minimize,
    /// Relax a polyline between two shell states and polish the maximum.
    MountainPass,
    /// First eigenpair of the linear beam problem.
    Eigen {
        /// Significant digits in the CSV output.
        #[arg(long)]
        digits: Option<usize>,
    },
    /// Asymptotic and multiplicity scans.
    Scan,
    /// Built-in end-to-end reproductions (example-3-3, example-3-9).
    Reproduce { which: String },
}

fn build_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match (&cli.config, &cli.example) {
        (Some(path), _) => RunConfig::from_file(path)?,
        (None, Some(name)) => RunConfig::builtin(name)?,
        (None, None) => RunConfig::default(),
    };
    if let Some(p) = cli.panels {
        cfg.panels = p;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if cli.json || cli.csv {
        cfg.output.json = cli.json;
        cfg.output.csv = cli.csv;
    }
    if let Some(t) = cli.tol {
        match cli.command {
            Command::Certify | Command::Scan => cfg.quadrature.refinement_tolerance = t,
            Command::Solve | Command::Reproduce { .. } => cfg.solver.tol = t,
            Command::Minimize => cfg.minimize.tol = t,
            Command::MountainPass => cfg.mountain_pass.tol = t,
            Command::Eigen { .. } => {}
        }
    }
    if let Command::Eigen { digits: Some(d) } = &cli.command {
        cfg.output.csv_digits = *d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let cfg = build_config(cli)?;
    let mut em = Emitter::new(
        &cfg.output.dir,
        cfg.output.json,
        cfg.output.csv,
        cfg.output.csv_digits,
    )?;
    let ok = match &cli.command {
        Command::Certify => commands::cmd_certify(&cfg, &mut em)?,
        Command::Solve => commands::cmd_solve(&cfg, &mut em)?,
        Command::Minimize => commands::cmd_minimize(&cfg, &mut em)?,
        Command::MountainPass => commands::cmd_mountain_pass(&cfg, &mut em)?,
        Command::Eigen { .. } => commands::cmd_eigen(&cfg, &mut em)?,
        Command::Scan => commands::cmd_scan(&cfg, &mut em)?,
        Command::Reproduce { which } => commands::cmd_reproduce(&cfg, which, &mut em)?,
    };
    for path in &em.written {
        println!("wrote {}", path.display());
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Config(_)
                | Error::Parse { .. }
                | Error::Coverage(_)
                | Error::Discontinuity { .. }
                | Error::Negativity { .. } => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
