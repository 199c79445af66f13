//! Loading instance files, running their requests and writing reports.

pub mod error;
pub mod report;
pub mod runner;
pub mod schema;

use std::path::Path;

pub use error::CliError;
pub use report::Report;
pub use runner::Settings;

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Loads `path`, runs every request and assembles the report.
pub fn run_file(path: &Path, s: Settings, timings: bool) -> Result<Report, CliError> {
    let loaded = schema::load(&read(path)?)?;
    let outcomes = runner::run_all(&loaded, s)?;
    Ok(Report::build(&source_name(path), s, &outcomes, timings))
}

/// Runs only the `oracle-compare` requests naming `oracle`; without any, runs one with default parameters.
pub fn run_oracle(path: &Path, oracle: &str, s: Settings, timings: bool) -> Result<Report, CliError> {
    let mut loaded = schema::load(&read(path)?)?;
    let mut reqs: Vec<schema::Request> =
        loaded.requests.iter().filter(|r| r.op == "oracle-compare" && r.oracle.as_deref() == Some(oracle)).cloned().collect();
    if reqs.is_empty() {
        let action = (loaded.actions.len() == 1).then(|| loaded.actions.keys().next().cloned()).flatten();
        reqs.push(schema::Request { op: "oracle-compare".into(), oracle: Some(oracle.into()), action, ..Default::default() });
    }
    loaded.requests = reqs;
    let outcomes = runner::run_all(&loaded, s)?;
    Ok(Report::build(&source_name(path), s, &outcomes, timings))
}

fn source_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}
