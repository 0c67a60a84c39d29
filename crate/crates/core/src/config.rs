//! Run configuration shared by the command-line tools.
//!
//! Optional TOML file; every key may be omitted:
//!
//! ```toml
//! seed = 0
//! tokenizer = "path/to/vocab.json"   # or a directory with vocab.json + merges.txt
//! jobs = 8
//! max_rounds = 6
//! max_commits = 1000
//! oracle_timeout_secs = 30.0
//!
//! [limits]
//! query_tokens = 1024
//! reference_block_tokens = 512
//! reference_budget = 16384
//!
//! [keystrokes]
//! cursor_jump_cost = 4
//! init_cursor_dis = 4
//! ```
//!
//! Precedence: command-line flags, then `COEDIT_TOKENIZER` (tokenizer
//! only), then the file, then the defaults above.

use crate::context::ContextLimits;
use crate::metrics::KeystrokeParams;
use crate::sim::{SimConfig, MAX_ROUNDS};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Duration;

pub const TOKENIZER_ENV: &str = "COEDIT_TOKENIZER";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub tokenizer: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    pub jobs: Option<usize>,
    pub max_rounds: usize,
    pub max_commits: usize,
    pub oracle_timeout_secs: f64,
    pub limits: ContextLimits,
    pub keystrokes: KeystrokeParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tokenizer: None,
            jobs: None,
            max_rounds: MAX_ROUNDS,
            max_commits: 1000,
            oracle_timeout_secs: 30.0,
            limits: ContextLimits::default(),
            keystrokes: KeystrokeParams::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("invalid setting: {0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Fills the tokenizer from the environment when the file left it unset.
    pub fn with_env(mut self) -> Self {
        if self.tokenizer.is_none() {
            self.tokenizer = std::env::var_os(TOKENIZER_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from);
        }
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let l = &self.limits;
        if l.query_tokens == 0 || l.reference_block_tokens == 0 || l.reference_budget == 0 {
            return Err(ConfigError::Invalid("token budgets must be positive".into()));
        }
        if self.max_rounds == 0 {
            return Err(ConfigError::Invalid("max_rounds must be positive".into()));
        }
        if self.jobs == Some(0) {
            return Err(ConfigError::Invalid("jobs must be positive".into()));
        }
        if !(self.oracle_timeout_secs.is_finite() && self.oracle_timeout_secs > 0.0) {
            return Err(ConfigError::Invalid("oracle_timeout_secs must be positive".into()));
        }
        Ok(())
    }

    pub fn oracle_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.oracle_timeout_secs)
    }

    pub fn sim(&self) -> SimConfig {
        SimConfig {
            max_rounds: self.max_rounds,
            limits: self.limits,
            keystrokes: self.keystrokes,
        }
    }
}
