//! Flat key-value experiment configuration with `[section]` headers.
//!
//! Grammar (one construct per line):
//! - `# comment` or blank lines — ignored
//! - `[section]` — all following keys are namespaced `section.key`
//! - `key = value` — the value is the trimmed remainder of the line
//!
//! Keys are unique; redefining one is a parse error. All parse errors carry
//! the 1-based line number.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use phasekit::{PhaseError, Result};

#[derive(Clone, Debug, Default)]
pub struct ExperimentConfig {
    entries: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[') {
                let name = inner.strip_suffix(']').ok_or_else(|| {
                    PhaseError::Parse(format!("line {lineno}: unterminated section header `{line}`"))
                })?;
                let name = name.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    return Err(PhaseError::Parse(format!(
                        "line {lineno}: invalid section name `{name}`"
                    )));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                PhaseError::Parse(format!("line {lineno}: expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(PhaseError::Parse(format!(
                    "line {lineno}: invalid key `{key}`"
                )));
            }
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            if entries.contains_key(&full) {
                return Err(PhaseError::Parse(format!(
                    "line {lineno}: duplicate key `{full}`"
                )));
            }
            entries.insert(full, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            PhaseError::Parse(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| PhaseError::Parse(format!("missing required config key `{key}`")))
    }

    fn typed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                PhaseError::Parse(format!("config key `{key}`: `{raw}` is not a valid {what}"))
            }),
        }
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.typed::<usize>(key, "unsigned integer")?.unwrap_or(default))
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.typed::<u64>(key, "unsigned integer")?.unwrap_or(default))
    }

    pub fn get_i64(&self, key: &str, default: i64) -> Result<i64> {
        Ok(self.typed::<i64>(key, "integer")?.unwrap_or(default))
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.typed::<f64>(key, "number")?.unwrap_or(default))
    }

    pub fn get_bool(&self, key: &str, default: bool) -> Result<bool> {
        Ok(self.typed::<bool>(key, "boolean (true/false)")?.unwrap_or(default))
    }

    pub fn get_str(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    /// Comma-separated list value.
    pub fn get_list(&self, key: &str, default: &[&str]) -> Vec<String> {
        match self.get(key) {
            None => default.iter().map(|s| s.to_string()).collect(),
            Some(raw) => raw
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
        }
    }

    /// Canonical resolved form: sorted `key = value` lines.
    pub fn resolved(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
