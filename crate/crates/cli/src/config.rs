//! Flat `key = value` configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are unique; any
//! key a subcommand does not know about is an error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    /// Directory that relative paths are resolved against.
    base: PathBuf,
}

impl Config {
    pub fn parse(text: &str, base: &Path) -> Result<Config> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                anyhow!("line {}: expected `key = value`, got {raw:?}", lineno + 1)
            })?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                bail!("line {}: malformed key {key:?}", lineno + 1);
            }
            if values
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                bail!("line {}: duplicate key {key:?}", lineno + 1);
            }
        }
        Ok(Config {
            values,
            base: base.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Config::parse(&text, &base).with_context(|| format!("in config {}", path.display()))
    }

    pub fn empty() -> Config {
        Config {
            values: BTreeMap::new(),
            base: PathBuf::from("."),
        }
    }

    /// Command-line flags win over the file.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        let unknown: Vec<&str> = self
            .values
            .keys()
            .map(String::as_str)
            .filter(|k| !allowed.contains(k))
            .collect();
        if !unknown.is_empty() {
            bail!(
                "unknown config key(s) {}; accepted keys are {}",
                unknown.join(", "),
                allowed.join(", ")
            );
        }
        Ok(())
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.raw(key)
            .ok_or_else(|| anyhow!("missing required key {key:?}"))
    }

    pub fn get<T>(&self, key: &str, default: T, parse: impl Fn(&str) -> Result<T>) -> Result<T> {
        match self.raw(key) {
            Some(v) => parse(v).with_context(|| format!("bad value for {key:?}")),
            None => Ok(default),
        }
    }

    pub fn path(&self, value: &str) -> PathBuf {
        let p = Path::new(value);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// `key=value` pairs in key order, joined by `;`.
    pub fn canonical(&self) -> String {
        self.values
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// A float, optionally written as a multiple of pi (`2pi`, `0.5pi`, `pi`).
pub fn parse_f64(s: &str) -> Result<f64> {
    let s = s.trim();
    let value = if let Some(head) = s.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*');
        let factor = if head.is_empty() {
            1.0
        } else {
            head.parse::<f64>()?
        };
        factor * std::f64::consts::PI
    } else {
        s.parse::<f64>()?
    };
    if !value.is_finite() {
        bail!("{s:?} is not finite");
    }
    Ok(value)
}

pub fn parse_usize(s: &str) -> Result<usize> {
    Ok(s.trim().parse()?)
}

pub fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => bail!("expected true or false, got {other:?}"),
    }
}

/// Comma-separated list.
pub fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("empty entry in list {s:?}");
    }
    parts.into_iter().map(item).collect()
}

pub fn parse_i64(s: &str) -> Result<i64> {
    Ok(s.trim().parse()?)
}
