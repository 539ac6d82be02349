use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use thiserror::Error;

use crate::config::RunConfig;

/// Version written into, and demanded from, every JSON report.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: malformed JSON: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{path}: missing schema_version")]
    NoVersion { path: String },
    #[error("{path}: unsupported schema_version '{found}' (expected '{SCHEMA_VERSION}')")]
    Version { path: String, found: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io { path: path.display().to_string(), source }
}

/// Wraps command results with the schema version and the config echo. The
/// output directory is left out so that reports from different directories
/// can be compared byte for byte.
pub fn envelope(cfg: &RunConfig, results: Value) -> Value {
    let mut echo = cfg.echo();
    echo.remove("out");
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command.name(),
        "config": echo,
        "results": results,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), ReportError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|source| ReportError::Json { path: path.display().to_string(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Writes a CSV file with a header row; every row must match the header width.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), ReportError> {
    let mut buf = Vec::new();
    writeln!(buf, "{}", header.join(",")).map_err(io_err(path))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writeln!(buf, "{}", row.join(",")).map_err(io_err(path))?;
    }
    fs::write(path, buf).map_err(io_err(path))
}

/// Reads a JSON report, rejecting any schema version other than the current one.
pub fn read_report(path: &Path) -> Result<Value, ReportError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_report(&text).map_err(|e| match e {
        ReportError::Json { source, .. } => ReportError::Json { path: path.display().to_string(), source },
        ReportError::NoVersion { .. } => ReportError::NoVersion { path: path.display().to_string() },
        ReportError::Version { found, .. } => ReportError::Version { path: path.display().to_string(), found },
        other => other,
    })
}

pub fn parse_report(text: &str) -> Result<Value, ReportError> {
    let value: Value =
        serde_json::from_str(text).map_err(|source| ReportError::Json { path: "<text>".into(), source })?;
    match value.get("schema_version") {
        None => Err(ReportError::NoVersion { path: "<text>".into() }),
        Some(Value::String(s)) if s == SCHEMA_VERSION => Ok(value),
        Some(other) => Err(ReportError::Version {
            path: "<text>".into(),
            found: other.as_str().map_or_else(|| other.to_string(), str::to_string),
        }),
    }
}

/// Shortest text that reads back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v}")
}
