//! Config loading: JSON on disk to a validated [`SimConfig`].

use std::fs;
use std::path::Path;

use stacklab::sim::SimConfig;

use crate::error::CliError;

/// Parses and validates a config file. Parse errors carry the JSON path to
/// the offending key (unknown keys are rejected by the schema); validation
/// errors name the violated invariant.
pub fn load_config(path: &Path) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let deserializer = &mut serde_json::Deserializer::from_str(&text);
    let config: SimConfig =
        serde_path_to_error::deserialize(deserializer).map_err(|err| CliError::ConfigParse {
            path: path.to_path_buf(),
            pointer: err.path().to_string(),
            source: err.into_inner(),
        })?;
    config
        .validate()
        .map_err(|source| CliError::ConfigInvalid {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(config)
}
