//! `manipkd` command-line front end. CSV on stdout (or `--out`), diagnostics on
//! stderr. Exit codes: 0 success, 1 usage or validation error, 2 solver did not
//! reach its goal.

mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;

const USAGE_ERROR: u8 = 1;
const NOT_SOLVED: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE_ERROR),
            };
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(NOT_SOLVED),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, String> {
    let model = commands::resolve_model(cli.model.as_deref())?;
    let output = commands::run(&model, &cli.command, cli.verbose)?;
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &output.text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => std::io::stdout()
            .lock()
            .write_all(output.text.as_bytes())
            .map_err(|e| e.to_string())?,
    }
    Ok(output.solved)
}
