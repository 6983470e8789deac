//! TOML configuration and the reward-config digest.

use std::path::{Path, PathBuf};

use qverify_core::dataset::DatasetConfig;
use qverify_core::metrics::MetricsConfig;
use qverify_core::reward::RewardConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable naming a config file when no path is passed.
pub const CONFIG_ENV: &str = "QVERIFY_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub listen: String,
    pub max_batch: usize,
    /// Requests evaluated at once before new ones get 503.
    pub max_in_flight: usize,
    /// Deadline for the optimization stage of a single evaluation.
    pub request_timeout_ms: u64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            max_batch: 64,
            max_in_flight: 256,
            request_timeout_ms: 30_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub reward: RewardConfig,
    pub dataset: DatasetConfig,
    pub metrics: MetricsConfig,
    pub server: ServerConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
}

impl Config {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    /// Loads `explicit`, else the file named by `QVERIFY_CONFIG`, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<(Self, Option<PathBuf>), ConfigError> {
        let path = explicit
            .map(Path::to_owned)
            .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
        match path {
            Some(p) => Ok((Self::load(&p)?, Some(p))),
            None => Ok((Self::default(), None)),
        }
    }
}

fn sha256_json<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config serializes");
    hex::encode(Sha256::digest(&json))
}

/// SHA-256 hex of the reward config's canonical JSON form.
pub fn config_digest(reward: &RewardConfig) -> String {
    sha256_json(reward)
}

impl Config {
    /// Digest of every section, recorded in run manifests.
    pub fn digest(&self) -> String {
        sha256_json(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_toml_keeps_defaults() {
        let c = Config::from_toml("[reward]\ntau_js = 0.4\n[reward.optimizer]\nmax_steps = 50\n", Path::new("x")).unwrap();
        assert_eq!(c.reward.tau_js, 0.4);
        assert_eq!(c.reward.tau_ev, 0.8);
        assert_eq!(c.reward.optimizer.max_steps, 50);
        assert_eq!(c.server.max_batch, 64);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Config::from_toml("[reward]\ntau = 1\n", Path::new("x")).is_err());
    }

    #[test]
    fn digest_tracks_reward_config() {
        let a = RewardConfig::default();
        let mut b = a;
        assert_eq!(config_digest(&a), config_digest(&b));
        b.tau_js = 0.6;
        assert_ne!(config_digest(&a), config_digest(&b));
        assert_eq!(config_digest(&a).len(), 64);
    }
}
