use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cokinetic::cli::{expand_suite, load_scenario, run, run_suites, RunReport};

/// Scenario-driven verification of co-Hamiltonian geometry on flat models.
#[derive(Parser)]
#[command(name = "cokinetic", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario's tasks and emit a JSON report.
    Run {
        scenario: PathBuf,
        /// Only tasks with this name (or command).
        #[arg(long)]
        only: Option<String>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for CSV tables.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check a scenario file without running it.
    Validate { scenario: PathBuf },
    /// Run a packaged suite (algebra, lengths, reparam, lift, fixpoints,
    /// infrastructure, or a single member suite).
    Suite {
        name: String,
        /// Reduced sizes.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 0xC04A)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn configure_threads() {
    if let Some(n) = std::env::var("COKINETIC_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn emit(report: &RunReport, out: Option<PathBuf>, csv: Option<PathBuf>) -> ExitCode {
    eprint!("{}", report.summary());
    let json = report.to_json();
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, json + "\n") {
                eprintln!("cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{json}"),
    }
    if let Some(dir) = csv {
        if let Err(e) = report.write_csv(&dir) {
            eprintln!("cannot write CSV to {}: {e}", dir.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match cli.command {
        Cmd::Run { scenario, only, out, csv } => {
            let s = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(o) = &only {
                if !s.selects(o) {
                    eprintln!("no task or command named '{o}'");
                    return ExitCode::from(2);
                }
            }
            emit(&run(&s, only.as_deref()), out, csv)
        }
        Cmd::Validate { scenario } => match load_scenario(&scenario) {
            Ok(s) => {
                println!(
                    "valid: {} isotopies, {} curves, {} tasks",
                    s.isotopies.len(),
                    s.curves.len(),
                    s.tasks.len()
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
        },
        Cmd::Suite { name, quick, seed, out, csv } => {
            if expand_suite(&name).is_none() {
                eprintln!("unknown suite '{name}'");
                return ExitCode::from(2);
            }
            emit(&run_suites(&[name.as_str()], quick, seed), out, csv)
        }
    }
}
