//! CSV export and re-import.
//!
//! Two schemas, both long-format, UTF-8, LF line endings, mandatory header:
//!
//! - trace:   `run_seed,t,a,b,r_l,r_f,leader_algo,follower_algo`
//! - summary: `checkpoint_t,metric,mean,std,n_seeds`
//!
//! Values are written in the shortest decimal form that parses back to the
//! identical bits, so reading a file and re-writing it reproduces it byte
//! for byte, and downstream consumers see exactly the numbers the runs
//! produced.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use stacklab::sim::{RunOutput, SummaryRow};

use crate::error::CliError;

pub const TRACE_HEADER: &str = "run_seed,t,a,b,r_l,r_f,leader_algo,follower_algo";
pub const SUMMARY_HEADER: &str = "checkpoint_t,metric,mean,std,n_seeds";

/// Shortest decimal representation that round-trips to the same `f64`.
/// (Rust's display implementation guarantees exactly that; infinities come
/// out as `inf` / `-inf`, which `f64::from_str` accepts back.)
pub fn format_value(value: f64) -> String {
    format!("{value}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes per-round records for every seed of a batch, in seed order. Runs
/// traced with no records produce a header-only file.
pub fn write_trace_csv(
    path: &Path,
    runs: &[RunOutput],
    leader_algo: &str,
    follower_algo: &str,
) -> Result<(), CliError> {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for run in runs {
        for record in &run.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{leader_algo},{follower_algo}",
                run.metrics.seed,
                record.t,
                record.pair.a,
                record.pair.b,
                format_value(record.leader_reward),
                format_value(record.follower_reward),
            );
        }
    }
    write_file(path, &out)
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<(), CliError> {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.checkpoint_t,
            row.metric,
            format_value(row.mean),
            format_value(row.std),
            row.n_seeds,
        );
    }
    write_file(path, &out)
}

/// Reads a summary file back into rows. The metric column never contains
/// commas, so a plain split suffices.
pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != SUMMARY_HEADER {
        return Err(CliError::BadCsvHeader {
            path: path.to_path_buf(),
            expected: SUMMARY_HEADER,
            found: header.to_string(),
        });
    }
    let mut rows = Vec::new();
    for (index, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let parsed = (|| -> Option<SummaryRow> {
            let [t, metric, mean, std, n] = fields.as_slice() else {
                return None;
            };
            Some(SummaryRow {
                checkpoint_t: t.parse().ok()?,
                metric: (*metric).to_string(),
                mean: mean.parse().ok()?,
                std: std.parse().ok()?,
                n_seeds: n.parse().ok()?,
            })
        })();
        match parsed {
            Some(row) => rows.push(row),
            None => {
                return Err(CliError::BadCsvRow {
                    path: path.to_path_buf(),
                    line: index + 2,
                })
            }
        }
    }
    Ok(rows)
}
