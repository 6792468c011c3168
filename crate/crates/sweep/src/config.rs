//! Plain-text `key = value` sweep configuration. Keys are the long flag names
//! of `pdarray sweep` without the leading dashes; `#` starts a comment.
//!
//! ```text
//! sweep = beta-fixed
//! G-max = 30
//! rho = 0.1, 0.5, 2
//! beams = gaussian, lg10
//! ```

use std::path::Path;

use anyhow::{Context, Result};

use crate::UsageError;

pub const KEYS: [&str; 14] = [
    "sweep",
    "G-min",
    "G-max",
    "m-max",
    "m-per-decade",
    "rho",
    "rho0",
    "xi",
    "snr-db",
    "beams",
    "out",
    "distance-model",
    "normalization",
    "svg",
];

/// Parsed entries in file order, with their line numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub entries: Vec<(usize, String, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("line {}: expected key = value, got '{line}'", i + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(UsageError(format!(
                    "line {}: unknown key '{key}' (known: {})",
                    i + 1,
                    KEYS.join(", ")
                ))
                .into());
            }
            entries.push((i + 1, key.to_string(), value.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    /// Last value given for `key`, with its line number.
    pub fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries
            .iter()
            .rev()
            .find(|(_, k, _)| k == key)
            .map(|(line, _, v)| (*line, v.as_str()))
    }
}
