//! Flat key=value configuration with sections.
//!
//! The file format is deliberately plain: `key = value` lines, optional
//! `[section]` headers that prefix following keys as `section.key`, and
//! `#` comments. Command defaults are filled first, then the file, then
//! CLI flags, so every flag overrides a config key. The merged result is
//! echoed into every output header for reproducibility.

use crate::error::Error;
use crate::Result;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// Ordered flat configuration map.
#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse a config file and overlay it on `self`.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        self.load_str(&text)
    }

    /// Parse config text and overlay it on `self`.
    pub fn load_str(&mut self, text: &str) -> Result<()> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(Error::Config(format!(
                        "line {}: malformed section header '{raw}'",
                        lineno + 1
                    )));
                }
                section = line[1..line.len() - 1].trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected 'key = value', got '{raw}'",
                    lineno + 1
                )));
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            self.values.insert(full, value.trim().to_string());
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    /// Set only if absent (used for command defaults).
    pub fn default_key(&mut self, key: &str, value: impl Into<String>) {
        self.values.entry(key.to_string()).or_insert_with(|| value.into());
    }

    pub fn get_str(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| Error::Config(format!("missing key '{key}'")))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        self.get_str(key)?
            .parse()
            .map_err(|_| Error::Config(format!("key '{key}' is not a float")))
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        self.get_str(key)?
            .parse()
            .map_err(|_| Error::Config(format!("key '{key}' is not a non-negative integer")))
    }

    pub fn get_bool(&self, key: &str) -> Result<bool> {
        match self.get_str(key)? {
            "true" | "1" | "yes" | "on" => Ok(true),
            "false" | "0" | "no" | "off" => Ok(false),
            other => Err(Error::Config(format!("key '{key}' is not a bool: '{other}'"))),
        }
    }

    /// Comma-separated float list.
    pub fn get_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.get_str(key)?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("key '{key}' has a non-float item '{s}'")))
            })
            .collect()
    }

    /// Comma-separated integer list.
    pub fn get_usize_list(&self, key: &str) -> Result<Vec<usize>> {
        self.get_str(key)?
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("key '{key}' has a non-integer item '{s}'")))
            })
            .collect()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Sorted `key = value` lines for output headers.
    pub fn echo_lines(&self) -> Vec<String> {
        self.values
            .iter()
            .map(|(k, v)| {
                let mut s = String::new();
                let _ = write!(s, "{k} = {v}");
                s
            })
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.values.iter()
    }
}
