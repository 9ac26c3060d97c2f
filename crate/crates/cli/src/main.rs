//! `lasso-paths`: instance generation, shortest-path solves through the
//! lasso, method comparison and property verification.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, every compare row failed),
//! 2 input error, 3 no valid path extracted, 4 solver non-convergence,
//! 5 property violation.

mod commands;
mod error;
mod load;
mod manifest;
mod methods;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::commands::{CompareArgs, GenerateCmd, SolveArgs, VerifyArgs};
use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(
    name = "lasso-paths",
    version,
    about = "Shortest paths through l1-regularized regression"
)]
struct Cli {
    /// Seed for generators, perturbations and sweeps.
    #[arg(long, global = true, env = "LASSO_PATHS_SEED", default_value_t = 0)]
    seed: u64,
    /// Output directory; receives every file written plus `manifest.json`.
    #[arg(long, global = true, default_value = "lasso-paths-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a generated instance (edge list, JSON sidecar, coordinates).
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Solve one s-t pair with one method.
    Solve(SolveArgs),
    /// Run several methods over a list of pairs and write a CSV report.
    Compare(CompareArgs),
    /// Check a LARS run against Dijkstra and the closed-form event times.
    Verify(VerifyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Solve(_) => "solve",
            Command::Compare(_) => "compare",
            Command::Verify(_) => "verify",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut manifest = RunManifest::new(cli.command.name(), cli.seed);
    let result = match &cli.command {
        Command::Generate(cmd) => commands::generate(cmd, cli.seed, &cli.out, &mut manifest),
        Command::Solve(args) => commands::solve(args, &cli.out, &mut manifest),
        Command::Compare(args) => commands::compare(args, cli.seed, &cli.out, &mut manifest),
        Command::Verify(args) => commands::verify(args, cli.seed, &cli.out, &mut manifest),
    };
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            manifest.status = e.to_string();
            e.exit_code()
        }
    };
    manifest.exit_code = code;
    manifest.wall_seconds = start.elapsed().as_secs_f64();
    if let Err(e) = manifest.write(&cli.out) {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}
