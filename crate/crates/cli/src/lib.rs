//! Command-line front end for `flowgrowth-core`: argument and config
//! resolution, output formats, and exit codes.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod parallel;
pub mod plot;

use std::ffi::OsString;
use std::path::Path;

use clap::error::ErrorKind;
use clap::Parser;
use flowgrowth_core::sim::EnsembleKind;
use serde_json::{json, Map, Value};

use crate::args::{Cli, Command, Format};
use crate::commands::Artifact;
use crate::config::{FileConfig, RunConfig, SCHEMA};
use crate::error::{CliError, CliResult, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};
use crate::formats::write_output;

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => return parse_failure(e),
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn parse_failure(e: clap::Error) -> i32 {
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = e.print();
            EXIT_OK
        }
        ErrorKind::InvalidSubcommand
        | ErrorKind::MissingSubcommand
        | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = e.print();
            EXIT_USAGE
        }
        _ => {
            let field = e
                .get(clap::error::ContextKind::InvalidArg)
                .map(|a| a.to_string())
                .unwrap_or_else(|| "arguments".into());
            eprintln!("error: invalid {field}");
            let _ = e.print();
            EXIT_VALIDATION
        }
    }
}

fn execute(cli: &Cli) -> CliResult<()> {
    let name = cli.command.name();
    let file = match &cli.config {
        Some(p) => config::load(p, name)?,
        None => FileConfig::default(),
    };
    let format = cli.format.or(file.format).unwrap_or(Format::Json);
    let workers = cli.workers.unwrap_or_else(parallel::default_workers);
    let artifact = dispatch(&cli.command, &file.parameters, workers)?;
    let bytes = render(name, format, &artifact, cli.output.as_deref())?;
    write_output(cli.output.as_deref(), &bytes)?;
    match artifact.failure {
        Some(f) => Err(CliError::VerificationFailed(f)),
        None => Ok(()),
    }
}

fn dispatch(cmd: &Command, file: &Map<String, Value>, workers: usize) -> CliResult<Artifact> {
    match cmd {
        Command::Xi(a) => commands::xi(a, file),
        Command::XiOracle(a) => commands::xi_oracle(a, file),
        Command::Gronwall(a) => commands::gronwall(a, file),
        Command::Constants(a) => commands::constants(a, file),
        Command::Optimize(a) => commands::optimize(a, file),
        Command::Ibf(a) => commands::ibf(a, file),
        Command::SimulateRho(a) => commands::simulate(EnsembleKind::Rho, a, file, workers),
        Command::SimulateDerivative(a) => {
            commands::simulate(EnsembleKind::LogDerivativeNorm, a, file, workers)
        }
        Command::Verify(a) => commands::verify(a, file, workers),
        Command::Boxdim(a) => commands::boxdim(a, file),
    }
}

/// The JSON report envelope.
pub fn report(command: &str, format: Format, parameters: Value, result: Value) -> Value {
    let rc = RunConfig {
        command: command.to_string(),
        parameters,
        format,
    };
    json!({ "schema": SCHEMA, "command": command, "run_config": rc, "result": result })
}

fn render(name: &str, format: Format, a: &Artifact, output: Option<&Path>) -> CliResult<Vec<u8>> {
    let unsupported = || {
        CliError::validation(
            "format",
            format!("{} is not available for {name}", format.as_str()),
        )
    };
    match format {
        Format::Json => {
            let v = report(name, format, a.parameters.clone(), a.result.clone());
            let mut s = serde_json::to_string_pretty(&v)
                .map_err(|e| CliError::validation("result", e.to_string()))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => a
            .csv
            .clone()
            .map(String::into_bytes)
            .ok_or_else(unsupported),
        Format::Svg => a
            .svg
            .clone()
            .map(String::into_bytes)
            .ok_or_else(unsupported),
        Format::Bin => {
            if output.is_none() {
                return Err(CliError::validation("output", "binary output needs a file"));
            }
            a.bin.clone().ok_or_else(unsupported)
        }
    }
}
