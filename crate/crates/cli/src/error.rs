//! One error type for everything the front end can fail at, each variant
//! carrying enough context (paths, JSON pointer, violated invariant) for the
//! message alone to locate the problem.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Syntax or schema errors, with the JSON path to the offending key.
    #[error("invalid config {} at `{pointer}`: {source}", path.display())]
    ConfigParse {
        path: PathBuf,
        pointer: String,
        #[source]
        source: serde_json::Error,
    },
    /// Structurally valid config that violates a cross-field invariant.
    #[error("invalid config {}: {source}", path.display())]
    ConfigInvalid {
        path: PathBuf,
        #[source]
        source: stacklab::sim::ConfigError,
    },
    #[error("unknown preset `{name}`; available: {available}")]
    UnknownPreset { name: String, available: String },
    /// A command-line override produced a config that no longer validates.
    #[error("overrides leave run `{label}` invalid: {source}")]
    OverrideInvalid {
        label: String,
        #[source]
        source: stacklab::sim::ConfigError,
    },
    #[error("simulation failed: {0}")]
    Sim(#[from] stacklab::sim::SimError),
    #[error("cannot serialize report: {0}")]
    Report(#[from] serde_json::Error),
    #[error("{} does not start with the expected header; expected `{expected}`, found `{found}`", path.display())]
    BadCsvHeader {
        path: PathBuf,
        expected: &'static str,
        found: String,
    },
    #[error("{} line {line}: malformed row", path.display())]
    BadCsvRow { path: PathBuf, line: usize },
}
