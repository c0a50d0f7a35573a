//! `key = value` configuration files.
//!
//! One setting per line, `#` starts a comment, keys are the long flag names
//! without the leading dashes (`folds = 10`, `kernel = linear`). Flags given
//! on the command line override the file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

pub const KEYS: &[&str] = &[
    "corpus",
    "classifier",
    "classifiers",
    "k",
    "c",
    "gamma",
    "coef0",
    "kernel",
    "tol",
    "max-passes",
    "min-leaf",
    "max-depth",
    "stopwords",
    "suffixes",
    "skip",
    "keep-single-letters",
    "folds",
    "seed",
    "threads",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected `key = value`", n + 1))?;
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                bail!("config line {}: unknown key `{key}`", n + 1);
            }
            values.insert(key, value.trim().to_owned());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(text.trim_start_matches('\u{feff}')).with_context(|| format!("in {}", path.display()))
    }

    /// `flag`, else the file's value for `key` parsed as `T`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("config key `{key}`: {e}")))
            .transpose()
    }
}
