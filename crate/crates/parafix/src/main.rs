//! Thin argument parser over [`parafix::cli`].

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use parafix::cli::{cmd_certify_graphs, cmd_run, cmd_verify};
use parafix::DEFAULT_SEED;

/// Distributed fixed-point runs over time-varying graphs.
#[derive(Parser)]
#[command(name = "parafix", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write trace.csv, metrics.csv, summary.txt.
    Run {
        /// Scenario file (JSON).
        file: PathBuf,
        /// Output directory for the CSV and summary files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run verification checks and write report.csv.
    Verify {
        /// "all" or a comma-separated list of check names.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Seed for every sampled instance.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Output directory for report.csv.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Certify a scenario's graph schedule: find a window length under
    /// which consecutive windows compose to strongly connected graphs.
    Certify {
        /// Scenario file (JSON) whose schedule to certify.
        file: PathBuf,
        /// Largest window length to try.
        #[arg(long, default_value_t = 10)]
        lmax: usize,
        /// Windows checked per candidate length.
        #[arg(long, default_value_t = 5)]
        kmax: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { file, out } => cmd_run(&file, &out),
        Command::Verify { suite, seed, out } => cmd_verify(&suite, seed, &out),
        Command::Certify { file, lmax, kmax } => cmd_certify_graphs(&file, lmax, kmax),
    };
    ExitCode::from(code as u8)
}
