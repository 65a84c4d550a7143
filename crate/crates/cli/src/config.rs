//! Flat `section.key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are skipped. Keys must contain a
//! dot, may appear once, and are checked against the keys each command
//! accepts. Relative paths are resolved against the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::CliError;

#[derive(Debug, Clone)]
pub struct Config {
    entries: BTreeMap<String, String>,
    base: PathBuf,
    bytes: Vec<u8>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(bytes, base)
    }

    pub fn parse(bytes: Vec<u8>, base: PathBuf) -> Result<Self, CliError> {
        let text = std::str::from_utf8(&bytes).map_err(|_| CliError::Config("config is not valid UTF-8".into()))?;
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `section.key = value`", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let valid = k.split_once('.').is_some_and(|(s, rest)| !s.is_empty() && !rest.is_empty())
                && k.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
            if !valid {
                return Err(CliError::Config(format!("line {}: malformed key `{k}`", n + 1)));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{k}`", n + 1)));
            }
        }
        Ok(Self { entries, base, bytes })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Rejects keys outside `allowed`. A trailing `*` in an allowed key
    /// matches any suffix.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        for k in self.entries.keys() {
            let ok = allowed.iter().any(|a| match a.strip_suffix('*') {
                Some(prefix) => k.starts_with(prefix) && k.len() > prefix.len(),
                None => k == a,
            });
            if !ok {
                return Err(CliError::Config(format!("unknown key `{k}`")));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key).ok_or_else(|| CliError::Config(format!("missing key `{key}`")))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|v| v.parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`"))))
            .transpose()
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    /// Comma-separated values; empty items are dropped.
    pub fn list(&self, key: &str) -> Option<Vec<String>> {
        self.get(key).map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
    }

    pub fn parsed_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.list(key)
            .map(|items| {
                items
                    .iter()
                    .map(|v| v.parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`"))))
                    .collect()
            })
            .transpose()
    }

    pub fn resolve(&self, value: &str) -> PathBuf {
        let p = Path::new(value);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(|v| self.resolve(v))
    }

    /// Keys under `prefix` with the prefix stripped, in key order.
    pub fn with_prefix(&self, prefix: &str) -> Vec<(String, String)> {
        self.entries
            .iter()
            .filter_map(|(k, v)| k.strip_prefix(prefix).map(|rest| (rest.to_string(), v.clone())))
            .collect()
    }
}
