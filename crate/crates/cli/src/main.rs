//! Command-line front-end: exact counting tables, brute-force censuses,
//! MCMC sampling runs, ratio estimation and self-verification suites.

mod commands;
mod manifest;
mod verify;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VERIFY: u8 = 2;
pub const EXIT_IO: u8 = 3;

/// Failure classes mapped to process exit codes: usage 1, verification 2,
/// I/O 3.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verification,
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Verification => EXIT_VERIFY,
            Failure::Io(_) => EXIT_IO,
        }
    }
}

impl From<egcount::Error> for Failure {
    fn from(e: egcount::Error) -> Self {
        match e {
            egcount::Error::Io(io) => Failure::Io(io.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "egcount",
    version,
    about = "Exact counting of DAG models and MCMC sampling of essential graphs"
)]
struct Cli {
    /// Worker threads for enumeration and sampling; EG_CENSUS_THREADS is
    /// honored when absent, otherwise all cores are used. Results do not
    /// depend on the setting.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact counts of DAGs, connected DAGs or essential DAGs, and the exact
    /// connected/total ratio table
    Count(commands::CountArgs),
    /// Brute-force census of all labeled DAGs and their equivalence classes
    Oracle(commands::OracleArgs),
    /// Run independent MCMC chains and persist one terminal sample per chain
    Sample(commands::SampleArgs),
    /// Turn a sample file into ratio estimates with standard errors
    Estimate(commands::EstimateArgs),
    /// Self-verification suites (exit code 2 on any failed check)
    Verify(verify::VerifyArgs),
}

fn init_threads(flag: Option<usize>) {
    let threads = flag.or_else(|| {
        std::env::var("EG_CENSUS_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(k) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Count(args) => commands::count(args),
        Command::Oracle(args) => commands::oracle(args),
        Command::Sample(args) => commands::sample(args),
        Command::Estimate(args) => commands::estimate(args),
        Command::Verify(args) => verify::verify(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_threads(cli.threads);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Io(msg) => eprintln!("I/O error: {msg}"),
                Failure::Verification => {}
            }
            ExitCode::from(failure.exit_code())
        }
    }
}
