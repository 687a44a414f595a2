//! `auricle` command-line front end.
//!
//! Exit codes: 0 success, 1 input or configuration error, 2 partial numeric
//! failure (output is still written).

mod args;
mod commands;
mod provenance;

use std::process::ExitCode;

use clap::Parser as _;

use args::{Cli, Command, SimulateCommand};

#[derive(Debug)]
pub enum CliError {
    Input(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => f.write_str(m),
        }
    }
}

/// What a command reports on success.
pub struct Outcome {
    pub summary: String,
    /// Some numeric step failed but the output file was written.
    pub partial: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors are input errors; --help and --version are not
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    let result = match &cli.command {
        Command::Design(a) => commands::design(a),
        Command::Place(a) => commands::place(a),
        Command::Simulate(SimulateCommand::Cohort(a)) => commands::simulate_cohort(a),
        Command::Simulate(SimulateCommand::Session(a)) => commands::simulate_session(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Contour(a) => commands::contour(a),
    };
    match result {
        Ok(o) => {
            println!("{}", o.summary);
            if o.partial {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
