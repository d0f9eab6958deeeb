//! Flat `key=value` config files and value resolution.
//!
//! Precedence, highest first: command-line flag, config file, the
//! `MESHCONE_SEED` environment variable (seed only), built-in default.

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

pub const SEED_ENV: &str = "MESHCONE_SEED";

const KNOWN_KEYS: &[&str] = &[
    "lambda",
    "delta",
    "eps",
    "max-iters",
    "samples",
    "eval-samples",
    "seed",
    "diag",
    "no-normalize",
    "metrics",
    "step",
    "iters",
    "subdiv",
    "sweep",
];

#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    /// Keys match flag names without the leading dashes; `_` and `-` are
    /// interchangeable. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key=value", n + 1);
            };
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key '{key}'", n + 1);
            }
            let value = value.trim().trim_matches('"').to_string();
            values.insert(key, value);
        }
        Ok(Self { values })
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("config key '{key}': invalid value '{v}': {e}")),
        }
    }

    pub fn resolve<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn resolve_opt<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.parsed(key)
    }

    /// A set boolean flag wins; otherwise the file value, otherwise false.
    pub fn resolve_switch(&self, key: &str, flag: bool) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        Ok(self.parsed(key)?.unwrap_or(false))
    }

    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = self.resolve_opt("seed", flag)? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV}={v} is not a valid seed")),
            Err(_) => Ok(0),
        }
    }
}
