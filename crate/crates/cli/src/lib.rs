//! Command-line experiments on top of the `unitrans` library.
//!
//! [`run`] resolves a parsed [`Command`] against its configuration file,
//! validates it, computes, and only then writes the CSV table and the JSON
//! summary.

// `!(x > 0.0)` style checks reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod operator;
pub mod output;

use std::io::Write;

use config::{resolve, Command, Experiment};
use error::{CliError, CliResult};
use output::{write_all_or_nothing, Report};

pub use config::Cli;

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "UNITRANS_WORKERS";

/// Bytes of the finished artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub csv: Vec<u8>,
    pub summary: Vec<u8>,
}

fn execute<T: Experiment>(cli: &T, body: fn(&T) -> CliResult<Report>) -> CliResult<(Artifacts, T)> {
    let cfg = resolve(cli)?;
    // validation inside `body` runs before the digest touches any input file
    let report = body(&cfg)?;
    let digest = config::digest(&cfg)?;
    let mut value = serde_json::to_value(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(obj) = value.as_object_mut() {
        obj.remove("output");
    }
    let artifacts = Artifacts {
        csv: report.csv(T::NAME, &digest)?,
        summary: report.summary_json(T::NAME, &digest, value),
    };
    Ok((artifacts, cfg))
}

/// Compute the artifacts of `command` without writing anything.
pub fn compute(command: &Command) -> CliResult<(Artifacts, config::OutputArgs)> {
    fn go<T: Experiment>(cli: &T, body: fn(&T) -> CliResult<Report>) -> CliResult<(Artifacts, config::OutputArgs)> {
        let (a, cfg) = execute(cli, body)?;
        Ok((a, cfg.output().clone()))
    }
    match command {
        Command::Simulate(c) => go(c, experiments::simulate),
        Command::Exponents(c) => go(c, experiments::exponents),
        Command::ParsevalCheck(c) => go(c, experiments::parseval),
        Command::Subordinacy(c) => go(c, experiments::subordinacy),
        Command::FibBound(c) => go(c, experiments::fib_bound),
        Command::MeasureDiag(c) => go(c, experiments::measure_diag),
    }
}

/// Run `command` and write its outputs: files are written together or not at
/// all, and stdout receives whatever has no file.
pub fn run(command: &Command) -> CliResult<()> {
    let (artifacts, out) = compute(command)?;
    let mut files = Vec::new();
    if let Some(p) = &out.csv {
        files.push((p.as_path(), artifacts.csv.as_slice()));
    }
    if let Some(p) = &out.summary {
        files.push((p.as_path(), artifacts.summary.as_slice()));
    }
    write_all_or_nothing(&files)?;
    let mut stdout = std::io::stdout().lock();
    let to_stdout = match (&out.csv, &out.summary) {
        (None, _) => Some(&artifacts.csv),
        (Some(_), None) => Some(&artifacts.summary),
        (Some(_), Some(_)) => None,
    };
    if let Some(bytes) = to_stdout {
        stdout
            .write_all(bytes)
            .and_then(|_| stdout.flush())
            .map_err(|e| CliError::io("<stdout>", e))?;
    }
    Ok(())
}

/// Size the global worker pool from [`WORKERS_ENV`] when it is set.
pub fn configure_workers() -> CliResult<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} = {raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}
