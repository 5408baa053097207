//! `vaxstock`: initial stock sizing for a single-wave vaccination campaign.

mod args;
mod commands;
mod error;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, ReplayArgs};
use error::CliError;
use report::{read_json, write_json, ErrorOutput, RunManifest, SCHEMA_VERSION};

fn replay(args: &ReplayArgs) -> Result<(), CliError> {
    let manifest: RunManifest = read_json(&args.manifest, "manifest")?;
    let mut run = manifest.run;
    let output = match &mut run {
        Command::Epsilon(a) => &mut a.output,
        Command::Fit(a) => {
            if args.emit_curve.is_some() {
                a.emit_curve = args.emit_curve.clone();
            }
            &mut a.output
        }
        Command::Plan(a) => &mut a.output,
        Command::Simulate(a) => &mut a.output,
        Command::Sweep(a) => &mut a.output,
        Command::Replay(_) => return Err(CliError::data("a manifest cannot record a replay")),
    };
    if args.json_out.is_some() {
        output.json_out = args.json_out.clone();
    }
    if args.csv_out.is_some() {
        output.csv_out = args.csv_out.clone();
    }
    commands::execute(&run).map(|_| ())
}

fn report_error(err: &CliError, command: &Command) {
    let out = ErrorOutput {
        schema_version: SCHEMA_VERSION,
        kind: "error".into(),
        code: err.code.into(),
        exit_code: err.exit_code,
        message: err.message.clone(),
    };
    match serde_json::to_string(&out) {
        Ok(line) => eprintln!("{line}"),
        Err(_) => eprintln!("error: {}", err.message),
    }
    if let Some(path) = commands::output_args(command).and_then(|o| o.json_out.as_ref()) {
        // best effort; the message is already on stderr
        let _ = write_json(path, &out);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Replay(args) => replay(args),
        other => commands::run(other.clone()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            report_error(&err, &cli.command);
            ExitCode::from(err.exit_code)
        }
    }
}
