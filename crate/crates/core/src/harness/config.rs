//! TOML configuration files. Every key is optional; command-line flags take
//! precedence over the file, and the file over built-in defaults.
//!
//! ```toml
//! nodes = 1000
//! degree = [4, 6, 8]
//! ratio = [1, 10, 100, 1000]
//! seed = 7
//! samples = 1000
//! sample_interval = 1.0
//! parallel = 2
//! out = "results"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

/// A scalar or a list of scalars.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub nodes: Option<OneOrMany<usize>>,
    pub degree: Option<OneOrMany<f64>>,
    pub ratio: Option<OneOrMany<f64>>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub warmup: Option<f64>,
    pub sample_interval: Option<f64>,
    pub max_level: Option<usize>,
    pub fail_rate: Option<f64>,
    pub epsilon: Option<f64>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub parallel: Option<usize>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }
}
