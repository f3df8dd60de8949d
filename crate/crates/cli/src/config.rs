//! Flat key-value scenario files: one `key = value` per line, `#` starts a
//! comment, keys may carry a `group.` prefix for the rate-table rows.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// Errors split by exit code: config problems exit with 2, runtime
/// (numerical) problems with 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parsed scenario file.
#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    /// Canonical text used for config hashing.
    canonical: String,
}

impl Config {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                config_err(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(config_err(format!("line {}: empty key", lineno + 1)));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(config_err(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        let canonical = values
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("\n");
        Ok(Self { values, canonical })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| config_err(format!("missing required key `{key}`")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, value: &str) -> Result<T> {
        value
            .parse()
            .map_err(|_| config_err(format!("key `{key}`: cannot parse `{value}`")))
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            Some(v) => self.parse(key, v),
            None => Ok(default),
        }
    }

    pub fn require_usize(&self, key: &str) -> Result<usize> {
        let v = self.require(key)?;
        self.parse(key, v)
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            Some(v) => self.parse(key, v),
            None => Ok(default),
        }
    }

    pub fn require_u64(&self, key: &str) -> Result<u64> {
        let v = self.require(key)?;
        self.parse(key, v)
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            Some(v) => self.parse(key, v),
            None => Ok(default),
        }
    }

    pub fn get_bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(config_err(format!("key `{key}`: expected a boolean, got `{v}`"))),
            None => Ok(default),
        }
    }

    /// Comma list (`0,5,10`) or inclusive range (`start:step:stop`).
    pub fn require_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.require(key)?;
        parse_f64_list(key, v)
    }

    pub fn get_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            Some(v) => parse_f64_list(key, v),
            None => Ok(default.to_vec()),
        }
    }
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    let bad = |v: &str| config_err(format!("key `{key}`: cannot parse `{v}` as a number"));
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err(config_err(format!(
                "key `{key}`: ranges use `start:step:stop`, got `{value}`"
            )));
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad(parts[0]))?;
        let step: f64 = parts[1].trim().parse().map_err(|_| bad(parts[1]))?;
        let stop: f64 = parts[2].trim().parse().map_err(|_| bad(parts[2]))?;
        if step <= 0.0 || stop < start {
            return Err(config_err(format!(
                "key `{key}`: range needs step > 0 and stop >= start"
            )));
        }
        let mut out = Vec::new();
        let mut i = 0u64;
        loop {
            let v = start + step * i as f64;
            if v > stop + 1e-9 {
                break;
            }
            out.push(v);
            i += 1;
        }
        Ok(out)
    } else {
        value
            .split(',')
            .map(|p| p.trim().parse().map_err(|_| bad(p)))
            .collect()
    }
}
