//! `embias` command-line tool.

mod cli;
mod commands;
mod render;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::error::ErrorKind;
use clap::Parser;

use crate::cli::Cli;

/// Bad invocation that clap cannot see: missing `--model`, empty lists, and so on.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const EXIT_INPUT: u8 = 1;
const EXIT_INTERNAL: u8 = 2;

/// 1 for anything traceable to the user's input, 2 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    let input = err.chain().any(|cause| {
        cause.is::<embias::Error>()
            || cause.is::<std::io::Error>()
            || cause.is::<csv::Error>()
            || cause.is::<UsageError>()
    });
    if input {
        EXIT_INPUT
    } else {
        EXIT_INTERNAL
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format(|buf, record| {
            let tag = match record.level() {
                log::Level::Error => "error",
                log::Level::Warn => "warning",
                log::Level::Info => "info",
                _ => "debug",
            };
            writeln!(buf, "{tag}: {}", record.args())
        })
        .init();
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("EMBIAS_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        UsageError(format!(
            "EMBIAS_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("cannot start the thread pool")
}

fn timestamp(given: Option<&str>) -> Result<String> {
    match given {
        Some(t) => {
            chrono::DateTime::parse_from_rfc3339(t)
                .map_err(|e| UsageError(format!("invalid --timestamp {t:?}: {e}")))?;
            Ok(t.to_owned())
        }
        None => Ok(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
    }
}

fn run(cli: &Cli) -> Result<()> {
    init_threads()?;
    let ts = timestamp(cli.global.timestamp.as_deref())?;
    commands::run(&cli.global, &cli.command, ts)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INPUT),
            };
        }
    };
    init_logging(cli.global.verbose);
    match catch_unwind(AssertUnwindSafe(|| run(&cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}
