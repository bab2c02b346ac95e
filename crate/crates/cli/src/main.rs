use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crossdamp_cli::error::{CliError, Result};
use crossdamp_cli::manifest::{verify, FileStatus};
use crossdamp_cli::output::Format;
use crossdamp_cli::{list_scenarios, run, RunOptions};

#[derive(Parser)]
#[command(name = "crossdamp", version, about = "Cross-damped two-ion scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a configuration file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Size of the worker pool.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// List scenarios with their default fixtures.
    List {
        #[arg(long)]
        json: bool,
        /// Print the default configuration of one scenario.
        #[arg(long, value_name = "SCENARIO")]
        fixture: Option<String>,
    },
    /// Check the files listed in a run manifest against their checksums.
    Verify { manifest: PathBuf },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run {
            config,
            out_dir,
            seed,
            workers,
            format,
        } => {
            let outcome = run(&config, &RunOptions { out_dir, seed, workers, format })?;
            for rec in &outcome.manifest.outputs {
                println!("{}", outcome.out_dir.join(&rec.file).display());
            }
            println!("{}", outcome.out_dir.join(crossdamp_cli::manifest::MANIFEST_NAME).display());
            Ok(ExitCode::SUCCESS)
        }
        Command::List { json, fixture } => {
            let all = list_scenarios();
            if let Some(name) = fixture {
                let info = all
                    .iter()
                    .find(|s| s.name == name)
                    .ok_or_else(|| CliError::Verification(format!("unknown scenario {name:?}")))?;
                print!("{}", info.fixture);
            } else if json {
                println!("{}", serde_json::to_string_pretty(&all).expect("listing serialises"));
            } else {
                for s in &all {
                    println!("{:<16} {}", s.name, s.summary);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { manifest } => {
            let report = verify(&manifest)?;
            let mut clean = true;
            for (file, status) in &report {
                let label = match status {
                    FileStatus::Ok => "ok",
                    FileStatus::Missing => "MISSING",
                    FileStatus::Mismatch => "MISMATCH",
                };
                clean &= *status == FileStatus::Ok;
                println!("{label:<8} {file}");
            }
            Ok(if clean { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
