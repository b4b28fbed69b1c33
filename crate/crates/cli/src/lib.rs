//! Support library for the `stacklab` binary: config loading, the preset
//! catalog with its expectation checks, and lossless CSV export/re-import.
//! Kept as a library so tests and downstream tooling can consume the same
//! readers and writers the binary uses.

pub mod config;
pub mod csvio;
pub mod error;
pub mod preset;
