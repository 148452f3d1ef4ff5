//! `igc`: metric, curvature, geodesic and complexity computations for the
//! Gaussian correlation structures, emitted as CSV or JSON.
//!
//! Exit codes: 0 success, 2 configuration or admissibility error,
//! 3 integration failure, 4 convergence-diagnostic failure.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};

use config::{CommonArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "igc", version, about = "Information geometry of correlated Gaussian models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form and moment-engine metric with sectional curvature, per (structure, rho, sigma).
    Metric(CommonArgs),
    /// Riemann tensor diagnostics and curvature constancy, per (structure, rho, sigma).
    Curvature(CommonArgs),
    /// RK4 geodesic against the closed form (defaults to mono3).
    Geodesic(CommonArgs),
    /// Asymptotic IGC law per (structure, rho).
    Igc(CommonArgs),
    /// The four complexity-ratio curves, closed form and fitted.
    Figure1(CommonArgs),
    /// JSON report: decay rates, coefficients, ratio curves, peaks, reference notes.
    Report(CommonArgs),
}

type Runner = fn(&RunConfig) -> Result<(), error::CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            eprintln!("\n{}", Cli::command().render_usage());
            return ExitCode::from(2);
        }
    };
    let (args, run): (CommonArgs, Runner) = match cli.command {
        Command::Metric(a) => (a, commands::metric),
        Command::Curvature(a) => (a, commands::curvature),
        Command::Geodesic(a) => (a, commands::geodesic),
        Command::Igc(a) => (a, commands::igc),
        Command::Figure1(a) => (a, commands::figure1),
        Command::Report(a) => (a, commands::report),
    };
    match RunConfig::resolve(args).and_then(|c| run(&c)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
