//! Command implementations behind the `ccsim` binary. Every command
//! returns its rendered output so runs are reproducible byte for byte.

pub mod checks;
pub mod fuzz;
pub mod oracle;
pub mod run;
pub mod sweep;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::EngineError;
use crate::scenario::{Scenario, ScenarioError};
use crate::verification::EnumerationError;

pub use checks::{evaluate_checks, Check};
pub use fuzz::{cmd_fuzz, fuzz_template, FuzzOptions, FuzzReport};
pub use oracle::{cmd_oracle, OracleConfig, OracleReport};
pub use run::{cmd_run, RunOptions, RunReport};
pub use sweep::{cmd_sweep, SweepConfig, SweepReport, SweepRow};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Scenario {
        path: PathBuf,
        source: ScenarioError,
    },
    #[error("{path}: {field}: {message}")]
    Config {
        path: PathBuf,
        field: String,
        message: String,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
}

pub(crate) fn read_file(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, HarnessError> {
    let text = read_file(path)?;
    Scenario::from_toml_str(&text).map_err(|source| HarnessError::Scenario {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a TOML config, naming the offending key on failure.
pub(crate) fn parse_config<T: for<'de> serde::Deserialize<'de>>(
    path: &Path,
    text: &str,
) -> Result<T, HarnessError> {
    toml::from_str(text).map_err(|e| HarnessError::Config {
        path: path.to_path_buf(),
        field: "config".to_string(),
        message: e.message().to_string(),
    })
}
