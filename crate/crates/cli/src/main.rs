mod config;
mod runner;
mod summary;

use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunArgs;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

/// Batched multi-objective Bayesian optimization on benchmark problems.
#[derive(Debug, Parser)]
#[command(name = "bsmobo", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Aggregate final IGD and hypervolume over finished runs
    Summarize {
        /// Run directories, or output directories holding them
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Also write the table to this CSV file
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Some(Command::Summarize { dirs, out }) => {
            let rows = summary::summarize(&dirs)?;
            if let Some(path) = out {
                let file = File::create(&path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
                summary::write_summary(file, &rows).map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            summary::write_summary(std::io::stdout().lock(), &rows).map_err(|e| CliError::Runtime(e.to_string()))
        }
        None => runner::execute(&cli.run.resolve()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bsmobo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
