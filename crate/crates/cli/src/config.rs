use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// Keys accepted in a `--config` file; each mirrors the flag of the same
/// name with dashes replaced by underscores.
const KNOWN_KEYS: &[&str] = &[
    "gain",
    "sigma_r",
    "sigma_s",
    "frames",
    "max_shift",
    "jitter",
    "seed",
    "height",
    "width",
    "channels",
    "estimator",
    "ksize",
    "patch_radius",
    "bandwidth",
    "per_channel",
    "basis",
    "backend",
    "backends",
    "precision",
    "tile",
    "trials",
    "warmup",
    "scaling",
    "kmeans",
    "kmeans_iters",
    "threads",
];

/// Flat JSON object of defaults sitting between explicit flags and the
/// built-in defaults.
#[derive(Debug, Default)]
pub struct Config(Map<String, Value>);

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)?;
        let Value::Object(map) = value else {
            return Err(CliError::Usage("config file must hold a JSON object".into()));
        };
        if let Some(key) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("unknown config key `{key}`")));
        }
        Ok(Self(map))
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> CliResult<Option<T>> {
        debug_assert!(KNOWN_KEYS.contains(&key));
        match self.0.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}"))),
        }
    }

    /// `flag`, else the config value, else `default`.
    pub fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> CliResult<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// `flag`, else the config value, else `None`.
    pub fn pick_opt<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}
