mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command};
use commands::Output;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read input {0}")]
    Input(String),
    #[error(transparent)]
    Compute(#[from] ssakit::SsaError),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("SSAKIT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SSAKIT_THREADS must be a positive integer, got '{value}'")))?;
    // only fails if a pool already exists, which cannot happen this early
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let j = cli.json;
    let output = match &cli.command {
        Command::Decompose(a) => commands::decompose_cmd(a),
        Command::Reconstruct(a) => commands::reconstruct_cmd(a, j),
        Command::Wcor(a) => commands::wcor_cmd(a, j),
        Command::Autogroup(a) => commands::autogroup_cmd(a, j),
        Command::Forecast(a) => commands::forecast_cmd(a, j),
        Command::Gapfill(a) => commands::gapfill_cmd(a, j),
        Command::Estimate(a) => commands::estimate_cmd(a, j),
        Command::Cadzow(a) => commands::cadzow_cmd(a, j),
        Command::Rank(a) => commands::rank_cmd(a, j),
        Command::Detect(a) => commands::detect_cmd(a, j),
    }?;
    let text = match output {
        Output::Text(t) => t,
        Output::Json(v) => {
            let mut t = serde_json::to_string_pretty(&v).map_err(ssakit::SsaError::from)?;
            t.push('\n');
            t
        }
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
