use clap::{Parser, Subcommand};
use qbm_cli::{parse_config, run_scenario, OutputStatus};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

/// Quantum Brownian motion representation of field modes.
#[derive(Parser)]
#[command(name = "qbm-modes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts.
    Run { config: PathBuf },
    /// Check a scenario configuration without running it.
    Validate { config: PathBuf },
    /// Run the acceptance suite.
    Selftest,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Validate { config } => match parse_config(&config) {
            Ok(c) => {
                let names: Vec<&str> = c.outputs.iter().map(|o| o.as_str()).collect();
                println!("{}: valid (outputs: {})", config.display(), names.join(", "));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", config.display());
                ExitCode::from(EXIT_VALIDATION)
            }
        },
        Command::Run { config } => {
            let mut scenario = match parse_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return ExitCode::from(EXIT_VALIDATION);
                }
            };
            scenario.apply_env_override();
            let report = match run_scenario(&scenario) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_RUNTIME);
                }
            };
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for o in &report.outputs {
                match o.status {
                    OutputStatus::Ok => println!("{:<12} ok ({} files, {:.2}s)", o.name, o.files.len(), o.seconds),
                    OutputStatus::Failed => {
                        println!("{:<12} FAILED: {}", o.name, o.error.as_deref().unwrap_or("unknown error"))
                    }
                }
                for w in &o.warnings {
                    eprintln!("warning ({}): {w}", o.name);
                }
            }
            println!("artifacts in {}", report.output_dir);
            if report.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_RUNTIME)
            }
        }
        Command::Selftest => {
            if qbm_cli::selftest::selftest() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_RUNTIME)
            }
        }
    }
}
