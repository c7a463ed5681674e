//! Run configuration with three-level precedence: command-line flags
//! override an optional JSON config file, which overrides built-in
//! defaults (angles 16, quantiles 64, folds 10, seed 0).

use std::path::{Path, PathBuf};

use serde::Deserialize;

pub const DEFAULT_ANGLES: usize = 16;
pub const DEFAULT_QUANTILES: usize = 64;
pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_EPS_STD: f64 = 1e-8;

/// Knobs an optional JSON config file may supply.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub angles: Option<usize>,
    pub quantiles: Option<usize>,
    pub norm: Option<String>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub representation: Option<String>,
    pub eps_std: Option<f64>,
    pub output_path: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, nrcdt::Error> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        if !path.exists() {
            return Err(nrcdt::Error::MissingFile(path.display().to_string()));
        }
        let bytes = std::fs::read(path).map_err(|e| nrcdt::Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        serde_json::from_slice(&bytes)
            .map_err(|e| nrcdt::Error::InvalidConfig(format!("{}: {e}", path.display())))
    }
}

/// Flag value if given, else config-file value, else the default.
pub fn resolve<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
