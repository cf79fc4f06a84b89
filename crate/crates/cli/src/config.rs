//! `key = value` settings files. Keys are the long flag names without the
//! leading dashes; list values are comma-separated. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

use eigenformats::Reference;

const KEYS: &[&str] = &[
    "formats",
    "classes",
    "bits",
    "count",
    "buffer",
    "tol-8",
    "tol-16",
    "tol-32",
    "tol-64",
    "tol-reference",
    "seed",
    "workers",
    "out",
    "kind",
    "class-map",
];

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        ConfigFile::parse(&text).with_context(|| path.display().to_string())
    }

    pub fn parse(text: &str) -> Result<ConfigFile> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", i + 1);
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                bail!("line {}: unknown key `{k}`", i + 1);
            }
            if values.insert(k.to_owned(), v.to_owned()).is_some() {
                bail!("line {}: `{k}` given twice", i + 1);
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|s| s.parse().map_err(|e| anyhow!("config `{key}`: {e}")))
            .transpose()
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|s| {
                s.split(',')
                    .map(|t| t.trim().parse().map_err(|e| anyhow!("config `{key}`: {e}")))
                    .collect()
            })
            .transpose()
    }
}

pub fn tolerance(key: &str, s: &str) -> Result<Reference> {
    let t = Reference::parse_decimal(s).map_err(|e| anyhow!("{key}: {e}"))?;
    if !t.is_finite() || t.is_zero() || t.is_sign_negative() {
        bail!("{key}: tolerance must be positive, got `{s}`");
    }
    Ok(t)
}
