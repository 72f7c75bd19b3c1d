//! `vtd`: quadrature tables, trajectories and convergence studies for
//! variational time discretizations.

mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::Cli;

fn error_json(kind: &str, message: &str, interval: Option<usize>, resolution: Option<usize>) -> String {
    json!({
        "error": {
            "kind": kind,
            "message": message,
            "interval": interval,
            "resolution": resolution,
        }
    })
    .to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            eprintln!("{}", error_json("ConfigError", message.trim(), None, None));
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli) {
        Ok(output) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(output.as_bytes()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string(), e.interval(), e.resolution()));
            ExitCode::FAILURE
        }
    }
}
