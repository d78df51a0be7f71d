//! Flat key=value run configuration.
//!
//! Values come from three layers with increasing precedence: built-in
//! defaults, the `--config` file, and command-line `--set key=value`
//! overrides (plus the dedicated `--seed` / `--model` flags). Every
//! diagnostic names the offending key.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{config_err, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Config::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                config_err(format!(
                    "{} line {}: expected key=value, got {line:?}",
                    path.display(),
                    i + 1
                ))
            })?;
            cfg.values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(cfg)
    }

    /// Apply a `key=value` override from the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| config_err(format!("--set needs key=value, got {pair:?}")))?;
        self.values.insert(k.trim().to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// All keys sharing a dotted prefix, e.g. `agent.` -> (suffix, value).
    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> {
        self.values.iter().filter_map(move |(k, v)| {
            k.strip_prefix(prefix).map(|suffix| (suffix, v.as_str()))
        })
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| config_err(format!("key {key}: {v:?} is not an unsigned integer"))),
        }
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.get_u64(key, default as u64)? as usize)
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| config_err(format!("key {key}: {v:?} is not a number"))),
        }
    }

    pub fn get_opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| config_err(format!("key {key}: {v:?} is not a number"))),
        }
    }

    pub fn get_str<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_file_and_applies_overrides() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\nhorizon = 50\nagent.alice = static:0.8\n").unwrap();
        let mut cfg = Config::from_file(f.path()).unwrap();
        assert_eq!(cfg.get_u64("horizon", 0).unwrap(), 50);
        cfg.set_pair("horizon=75").unwrap();
        assert_eq!(cfg.get_u64("horizon", 0).unwrap(), 75);
        let agents: Vec<_> = cfg.with_prefix("agent.").collect();
        assert_eq!(agents, vec![("alice", "static:0.8")]);
    }

    #[test]
    fn bad_values_name_the_key() {
        let mut cfg = Config::default();
        cfg.set("horizon", "soon");
        let err = cfg.get_u64("horizon", 0).unwrap_err();
        assert!(err.to_string().contains("horizon"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_keys_fall_back_to_defaults() {
        let cfg = Config::default();
        assert_eq!(cfg.get_f64("sensitivity", 0.2).unwrap(), 0.2);
        assert_eq!(cfg.get_str("model", "bdtm"), "bdtm");
        assert!(cfg.get_opt_f64("ess_threshold").unwrap().is_none());
    }
}
