//! Scenario loading, run orchestration and result files for the `procure`
//! command-line tool.

pub mod commands;
pub mod output;
pub mod scenario;

use std::path::Path;

pub use commands::{cmd_exclusion, cmd_plotdata, cmd_solve, cmd_verify, Overrides, Prepared};
pub use scenario::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Malformed or inconsistent scenario input, naming the offending field.
    #[error("configuration error: {0}")]
    Scenario(String),
    #[error(transparent)]
    Core(#[from] procure_core::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
