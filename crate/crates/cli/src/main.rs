//! `fem-lab`: run JSON scenarios and seeded property suites.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use femlab::scenario::Scenario;
use femlab::suites::run_suite;
use femlab::Error;

const OUT_ENV: &str = "FEM_LAB_OUT";

#[derive(Parser)]
#[command(name = "fem-lab", version, about = "Exact experiments on piecewise-linear convex potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file and write its outputs.
    Run {
        file: PathBuf,
        /// Output directory; FEM_LAB_OUT takes precedence when set.
        #[arg(long, default_value = "fem-lab-out")]
        out: PathBuf,
        /// Threshold for float-valued convergence and distortion checks.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Run a property suite and print JSON lines to stdout.
    Suite {
        /// One of metric_axioms, energy_identities, measure_bounds,
        /// contraction, chains, gh.
        name: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

/// 1: an assertion failed. 2: the input was rejected.
fn exit_for(e: &Error) -> ExitCode {
    match e {
        Error::AssertionFailed(_) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn run(file: PathBuf, out: PathBuf, tolerance: Option<f64>) -> Result<(), Error> {
    let out = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or(out);
    let scenario = Scenario::from_file(&file)?;
    let outcome = scenario.run(tolerance)?;
    outcome.write_to(&out)?;
    for b in &outcome.blocks {
        println!(
            "block {:>2} {:<8} {}  {}",
            b.index,
            b.kind,
            if b.pass { "PASS" } else { "FAIL" },
            b.outputs.join(", ")
        );
    }
    outcome.ensure_pass()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { file, out, tolerance } => run(file, out, tolerance),
        Command::Suite { name, seed, count } => run_suite(&name, seed, count).and_then(|res| {
            print!("{}", res.to_json_lines());
            if res.summary.pass {
                Ok(())
            } else {
                Err(Error::AssertionFailed(format!("{} of {} trials passed", res.summary.trials_passed, count)))
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fem-lab: {e}");
            exit_for(&e)
        }
    }
}
