use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdirichlet_core::output::{self, Format};
use qdirichlet_core::report::{check_info, CATALOGUE};
use qdirichlet_core::scenario::{run_scenario, RunOptions, Scenario};
use qdirichlet_core::Status;

/// Dirichlet forms, generators and Markov semigroups on truncated Fock space.
#[derive(Parser)]
#[command(name = "qdirichlet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks listed in a scenario file.
    Run {
        config: PathBuf,
        /// Output directory for reports and spectra.
        #[arg(long, env = "QDIRICHLET_OUT", default_value = "qdirichlet-out")]
        out: PathBuf,
        #[arg(long, default_value = "json")]
        format: Format,
        /// Overrides the seed in the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List known check identifiers.
    ListChecks,
    /// Print the statement anchor of a check.
    Describe { check: String },
}

fn run(config: PathBuf, out: PathBuf, format: Format, seed: Option<u64>, jobs: Option<usize>) -> i32 {
    let outcome = Scenario::load(&config).and_then(|s| run_scenario(&s, &RunOptions { seed, jobs }));
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    for r in &outcome.reports {
        let status = match r.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::NotApplicable => "n/a",
            Status::Skipped => "skipped",
        };
        println!("{status:>8}  {:<26} residual {:.3e} (tol {:.1e})", r.check, r.residual, r.tolerance);
    }
    match output::write_outcome(&out, &outcome, format) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    }
    outcome.exit_code()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Run { config, out, format, seed, jobs } => run(config, out, format, seed, jobs),
        Command::ListChecks => {
            for c in CATALOGUE {
                println!("{:<26} {}", c.id, c.statement);
            }
            0
        }
        Command::Describe { check } => match check_info(&check) {
            Some(c) => {
                println!("{}", c.anchor);
                println!("{}", c.statement);
                0
            }
            None => {
                eprintln!("error: unknown check {check:?}");
                3
            }
        },
    };
    ExitCode::from(code as u8)
}
