//! `gll`: command-line front end for likelihood-based evidence.
//!
//! Exit codes: 0 on success, 2 for usage or parse errors, 3 for numeric failures.

mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command, ReducedCommand};
use commands::Output;
use output::{render, CliResult, RunManifest};

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Glr(_) => "glr",
        Command::Profile(_) => "profile",
        Command::Support(_) => "support",
        Command::Simulate(_) => "simulate",
        Command::Reduced {
            command: ReducedCommand::Test(_),
        } => "reduced test",
        Command::Reduced {
            command: ReducedCommand::Pvalue(_),
        } => "reduced pvalue",
    }
}

/// Writes to stdout; a closed pipe downstream is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn run(cli: &Cli, argv: Vec<String>) -> CliResult<()> {
    let start = Instant::now();
    let cfg = commands::load_config(cli.config.as_deref())?;
    let out = match &cli.command {
        Command::Glr(a) => commands::glr_cmd(a, &cfg)?,
        Command::Profile(a) => commands::profile_cmd(a, &cfg)?,
        Command::Support(a) => commands::support_cmd(a, &cfg)?,
        Command::Simulate(a) => commands::simulate_cmd(a, &cfg)?,
        Command::Reduced {
            command: ReducedCommand::Test(a),
        } => commands::reduced_test_cmd(a)?,
        Command::Reduced {
            command: ReducedCommand::Pvalue(a),
        } => commands::reduced_pvalue_cmd(a)?,
    };
    let name = command_name(&cli.command);
    match out {
        Output::Json { value, seed } => {
            let manifest = RunManifest::new(name, argv, seed, start.elapsed());
            emit(&format!("{}\n", render(&value, &manifest)?));
        }
        Output::Text(text) => {
            // CSV goes to stdout untouched; the manifest follows on stderr
            emit(&text);
            let manifest = RunManifest::new(name, argv, None, start.elapsed());
            let line = serde_json::to_string(&manifest).unwrap_or_default();
            eprintln!("{line}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
