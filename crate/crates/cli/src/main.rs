//! `phaseshift`: phase-shift tables, misfit values, counterexample searches
//! and profile comparisons for layered spherical potentials.
//!
//! Exit codes: 0 success, 2 invalid input, 3 failure while computing or
//! writing results.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod format;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{Method, Output, Overrides, SeedChoice};
use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "phaseshift", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Wavenumber; overrides `k` in the configuration.
    #[arg(long, global = true)]
    k: Option<f64>,

    /// Largest angular momentum in shift tables; overrides `l_max`.
    #[arg(long, global = true)]
    lmax: Option<usize>,

    /// Search seed: an unsigned integer, or `time` for a clock-derived seed.
    #[arg(long, global = true, value_parser = parse_seed)]
    seed: Option<SeedChoice>,

    /// Worker threads for the local searches (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    /// Phase-shift solver.
    #[arg(long, global = true, value_enum, default_value_t = MethodArg::Matrix)]
    method: MethodArg,

    /// Significant digits of printed numbers.
    #[arg(long, global = true)]
    precision: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the phase-shift table of `layer`.
    Shifts,
    /// Print the misfit of `layer` against the target.
    Phi,
    /// Search for potentials matching the target shifts.
    Search,
    /// Emit profiles, shift tables and the misfit of `layer` against the target.
    Compare,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Interface transfer matrices.
    Matrix,
    /// Direct integration of the radial equation.
    Ode,
}

fn parse_seed(text: &str) -> Result<SeedChoice, String> {
    if text == "time" {
        return Ok(SeedChoice::Time);
    }
    text.parse()
        .map(SeedChoice::Fixed)
        .map_err(|_| format!("expected an unsigned integer or `time`, got `{text}`"))
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    let Some(path) = &cli.config else {
        return Err(CliError::Invalid("--config <path> is required".into()));
    };
    let cfg = RunConfig::load(path)?;
    let opts = Overrides {
        k: cli.k,
        l_max: cli.lmax,
        seed: cli.seed,
        jobs: cli.jobs,
        method: match cli.method {
            MethodArg::Matrix => Method::Matrix,
            MethodArg::Ode => Method::Ode,
        },
        precision: cli.precision,
    };
    match cli.command {
        Command::Shifts => commands::shifts(&cfg, &opts),
        Command::Phi => commands::phi(&cfg, &opts),
        Command::Search => commands::search(&cfg, &opts),
        Command::Compare => commands::compare(&cfg, &opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|out| {
        for (path, content) in &out.files {
            std::fs::write(path, content).map_err(|e| CliError::Output {
                path: path.clone(),
                message: e.to_string(),
            })?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            eprint!("{}", out.stderr);
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.stdout.as_bytes()).is_err() {
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
