//! `rkbundle` command line: scenario checks, RKHS construction, pull-backs,
//! universality verification, Stinespring/GNS dilations, and built-in demos.

mod report;
mod runner;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use runner::{default_suite, run_suite, RunError};
use scenario::{load_scenario, load_scenario_str, Scenario};

#[derive(Parser)]
#[command(name = "rkbundle", version, about = "Reproducing (-*)-kernel verification")]
struct Cli {
    /// Relative tolerance override for residual checks
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Seed for randomized suites (reserved; all shipped checks are
    /// deterministic)
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a scenario and run its default (or named) check suite
    Check {
        file: PathBuf,
        /// Named check set: positivity, rkhs, pullback, universality,
        /// stinespring, gns, cat7
        #[arg(long)]
        suite: Option<String>,
    },
    /// Build the RKHS of a kernel scenario and verify the reproducing identity
    Rkhs { file: PathBuf },
    /// Pull a kernel scenario back along its morphism payload
    Pullback { file: PathBuf },
    /// Verify the universality theorems on a kernel, Grassmannian, or
    /// homogeneous scenario
    Universality { file: PathBuf },
    /// Stinespring dilation and compression factorization of a CP-map scenario
    Stinespring { file: PathBuf },
    /// GNS construction of a GNS scenario
    Gns { file: PathBuf },
    /// Run a built-in demo: szego, gaussian, m2-diagonal-gns, kraus-cp,
    /// tautological-c3
    Demo { name: String },
}

struct Job {
    scenario: Scenario,
    id: String,
    suite: String,
}

fn demo_fixture(name: &str) -> Option<(&'static str, &'static str)> {
    // (scenario text, suite)
    match name {
        "szego" => Some((include_str!("../fixtures/szego.json"), "universality")),
        "gaussian" => Some((include_str!("../fixtures/gaussian.json"), "universality")),
        "m2-diagonal-gns" => {
            Some((include_str!("../fixtures/m2-diagonal-gns.json"), "cat7"))
        }
        "kraus-cp" => Some((include_str!("../fixtures/kraus-cp.json"), "stinespring")),
        "tautological-c3" => {
            Some((include_str!("../fixtures/tautological-c3.json"), "universality"))
        }
        _ => None,
    }
}

fn prepare(command: &Command) -> Result<Job, String> {
    let from_file = |file: &PathBuf, suite: Option<String>| -> Result<Job, String> {
        let scenario = load_scenario(file).map_err(|e| e.to_string())?;
        let suite = suite.unwrap_or_else(|| default_suite(&scenario).to_string());
        Ok(Job { id: file.display().to_string(), scenario, suite })
    };
    match command {
        Command::Check { file, suite } => from_file(file, suite.clone()),
        Command::Rkhs { file } => from_file(file, Some("rkhs".into())),
        Command::Pullback { file } => from_file(file, Some("pullback".into())),
        Command::Universality { file } => from_file(file, Some("universality".into())),
        Command::Stinespring { file } => from_file(file, Some("stinespring".into())),
        Command::Gns { file } => from_file(file, Some("cat7".into())),
        Command::Demo { name } => {
            let (text, suite) = demo_fixture(name).ok_or_else(|| {
                format!(
                    "unknown demo '{name}' (available: szego, gaussian, m2-diagonal-gns, kraus-cp, tautological-c3)"
                )
            })?;
            let scenario = load_scenario_str(text).map_err(|e| e.to_string())?;
            Ok(Job { id: format!("demo:{name}"), scenario, suite: suite.to_string() })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let job = match prepare(&cli.command) {
        Ok(j) => j,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let report = match run_suite(&job.scenario, &job.id, &job.suite, cli.tolerance) {
        Ok(r) => r,
        Err(RunError::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(RunError::UnknownSuite(msg)) => {
            eprintln!("error: unknown suite '{msg}'");
            return ExitCode::from(2);
        }
    };
    match cli.format {
        Format::Human => print!("{}", report.emit_human()),
        Format::Json => println!("{}", report.emit_json()),
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
