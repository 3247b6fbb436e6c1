//! Service configuration: a TOML file plus environment overrides.
//!
//! ```toml
//! bind = "127.0.0.1:8080"
//! data_dir = "data"
//! log_level = "info"
//! static_dir = "ui/dist"   # optional
//! batch_ttl_secs = 86400   # optional; batches never expire by default
//! ```
//!
//! `RANKGRAD_BIND`, `RANKGRAD_DATA_DIR` and `RANKGRAD_LOG_LEVEL` override the
//! file.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    pub data_dir: PathBuf,
    pub log_level: String,
    pub static_dir: Option<PathBuf>,
    pub batch_ttl_secs: Option<u64>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            data_dir: "data".into(),
            log_level: "info".into(),
            static_dir: None,
            batch_ttl_secs: None,
        }
    }
}

impl ServiceConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
                    path: path.into(),
                    source,
                })?;
                toml::from_str(&text).map_err(|source| ConfigError::Parse {
                    path: path.into(),
                    source,
                })?
            }
            None => Self::default(),
        };
        config.apply_env(|key| std::env::var(key).ok());
        Ok(config)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) {
        if let Some(v) = var("RANKGRAD_BIND") {
            self.bind = v;
        }
        if let Some(v) = var("RANKGRAD_DATA_DIR") {
            self.data_dir = v.into();
        }
        if let Some(v) = var("RANKGRAD_LOG_LEVEL") {
            self.log_level = v;
        }
    }

    pub fn batch_ttl(&self) -> Option<Duration> {
        self.batch_ttl_secs.map(Duration::from_secs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_env() {
        let mut c: ServiceConfig =
            toml::from_str("bind = \"0.0.0.0:9000\"\nbatch_ttl_secs = 60\n").unwrap();
        assert_eq!(c.data_dir, PathBuf::from("data"));
        assert_eq!(c.batch_ttl(), Some(Duration::from_secs(60)));
        c.apply_env(|k| (k == "RANKGRAD_DATA_DIR").then(|| "/srv/rankgrad".to_string()));
        assert_eq!(
            (c.bind.as_str(), c.data_dir.to_str().unwrap()),
            ("0.0.0.0:9000", "/srv/rankgrad")
        );
        assert!(toml::from_str::<ServiceConfig>("port = 1").is_err());
    }
}
