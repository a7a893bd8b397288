//! `dpwlab`: synthesis, holonomy, residual, factorization, classification
//! and stability workflows.
//!
//! Every subcommand writes `<command>.json` (plus CSV/OBJ artifacts) into
//! `--out` and prints the report on stdout. Exit status: 0 ok, 1 failed
//! verification, 2 input error.

mod commands;
mod inputs;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;
use report::{write_artifact, CliError, EXIT_INPUT, EXIT_VERIFICATION};

#[derive(Parser, Debug)]
#[command(name = "dpwlab", version, about = "Loop-group minimal surface and genus-2 stability toolkit")]
struct Cli {
    /// Directory for reports and artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, global = true, env = "DPWLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Potential or chart data → OBJ mesh and geometry CSV.
    Synth(commands::SynthArgs),
    /// Holonomy traces and commutator probes over a ζ-grid.
    Holonomy(commands::HolonomyArgs),
    /// Coefficient, flatness and unitarity residuals of chart data.
    Residuals(commands::ResidualsArgs),
    /// Iwasawa residual suite on random loops.
    FactorizeTest(commands::FactorizeArgs),
    /// Extension functional → quadratic differential.
    Classify(commands::ClassifyArgs),
    /// Stability verdict with witness and oracle cross-check.
    Stability(commands::StabilityArgs),
    /// Pole-structure report of a potential.
    ValidatePotential(commands::ValidateArgs),
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::input("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::input(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Holonomy(a) => commands::holonomy_sweep(a),
        Command::Residuals(a) => commands::residuals(a),
        Command::FactorizeTest(a) => commands::factorize_test(a),
        Command::Classify(a) => commands::classify(a),
        Command::Stability(a) => commands::stability(a),
        Command::ValidatePotential(a) => commands::validate_potential(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("dpwlab: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let report = &outcome.report;
    let json = report.to_json();
    let name = format!("{}.json", report.command);
    let written = outcome
        .artifacts
        .iter()
        .map(|(n, c)| write_artifact(&cli.out, n, c))
        .chain(std::iter::once(write_artifact(&cli.out, &name, &json)))
        .collect::<Result<Vec<()>, _>>();
    if let Err(e) = written {
        eprintln!("dpwlab: {e}");
        return ExitCode::from(EXIT_INPUT);
    }
    print!("{json}");
    for w in &report.warnings {
        eprintln!("dpwlab: warning: {w}");
    }
    for d in &report.diagnostics {
        eprintln!("dpwlab: verification failure: {d}");
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFICATION)
    }
}
