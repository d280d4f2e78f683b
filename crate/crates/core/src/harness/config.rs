use std::path::Path;

use serde::Deserialize;

use super::{Baseline, EvalOptions, HarnessError};

/// The `[eval]` table of a run configuration file.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `rule` or `remote`.
    pub backend: String,
    pub m: usize,
    pub filter: bool,
    pub baseline: Option<Baseline>,
    pub lazy: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let o = EvalOptions::default();
        RunConfig { backend: "rule".into(), m: o.m, filter: o.filter, baseline: o.baseline, lazy: o.lazy }
    }
}

impl RunConfig {
    pub fn options(&self) -> EvalOptions {
        EvalOptions { m: self.m, filter: self.filter, baseline: self.baseline, lazy: self.lazy }
    }
}

/// A whole configuration file. The `[backend]` table belongs to the remote
/// backend and is read separately.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub eval: RunConfig,
    pub backend: Option<toml::Table>,
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: FileConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        if cfg.eval.m == 0 {
            return Err(HarnessError::Config("m must be at least 1".into()));
        }
        if !matches!(cfg.eval.backend.as_str(), "rule" | "remote") {
            return Err(HarnessError::Config(format!("unknown backend {:?}", cfg.eval.backend)));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }
}
