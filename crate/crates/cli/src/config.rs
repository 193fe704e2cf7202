//! Flat `key = value` configuration with command-line overrides.
//!
//! Keys are read through typed getters that record the value actually used
//! (including defaults), so [`Params::resolved`] is the complete
//! configuration of a run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// A configuration problem, naming the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub key: String,
    pub message: String,
}

impl UsageError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        UsageError { key: key.into(), message: message.into() }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for UsageError {}

/// Parse `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| UsageError::new(line, format!("line {} is not `key = value`", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(UsageError::new("", format!("line {} has an empty key", lineno + 1)));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

pub fn read_kv_file(path: &Path) -> Result<BTreeMap<String, String>, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError::new("config", format!("cannot read {}: {e}", path.display())))?;
    parse_kv(&text)
}

/// Parameters of one run.
#[derive(Debug, Clone)]
pub struct Params {
    raw: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Params {
    /// Merge file values with overrides (overrides win) and reject keys
    /// outside `allowed`.
    pub fn new(
        file: BTreeMap<String, String>,
        overrides: BTreeMap<String, String>,
        allowed: &[&str],
    ) -> Result<Self, UsageError> {
        let mut raw = file;
        raw.extend(overrides);
        if let Some(k) = raw.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(UsageError::new(k.clone(), format!("not used by this subcommand (known: {})", allowed.join(", "))));
        }
        let p = Params { raw, resolved: BTreeMap::new() };
        p.check_holder()?;
        Ok(p)
    }

    fn check_holder(&self) -> Result<(), UsageError> {
        let parse = |k: &str| self.raw.get(k).map(|v| parse_value::<f64>(k, v)).transpose();
        if let (Some(a), Some(b)) = (parse("alpha")?, parse("beta")?) {
            if (1.0 / a + 1.0 / b - 1.0).abs() > 1e-12 {
                return Err(UsageError::new("beta", format!("alpha={a} and beta={b} are not Hölder conjugates")));
            }
        }
        Ok(())
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.insert(key.to_string(), value);
    }

    /// Value of `key`, or `default`, recorded as used.
    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T, UsageError>
    where
        T: FromStr + fmt::Display,
    {
        let v = match self.raw.get(key) {
            Some(s) => parse_value(key, s)?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn get_opt<T>(&mut self, key: &str) -> Result<Option<T>, UsageError>
    where
        T: FromStr + fmt::Display,
    {
        match self.raw.get(key) {
            Some(s) => {
                let v: T = parse_value(key, s)?;
                self.record(key, v.to_string());
                Ok(Some(v))
            }
            None => Ok(None),
        }
    }

    pub fn require<T>(&mut self, key: &str, why: &str) -> Result<T, UsageError>
    where
        T: FromStr + fmt::Display,
    {
        self.get_opt(key)?.ok_or_else(|| UsageError::new(key, format!("required {why}")))
    }

    /// `alpha` and `beta` as a Hölder pair; either may be given.
    pub fn holder_pair(&mut self, default_alpha: f64) -> Result<(f64, f64), UsageError> {
        let alpha = match (self.get_opt::<f64>("alpha")?, self.get_opt::<f64>("beta")?) {
            (Some(a), _) => a,
            (None, Some(b)) => {
                if !(b > 1.0) {
                    return Err(UsageError::new("beta", "must be > 1"));
                }
                b / (b - 1.0)
            }
            (None, None) => default_alpha,
        };
        if !(alpha > 1.0) {
            return Err(UsageError::new("alpha", "must be > 1"));
        }
        let beta = alpha / (alpha - 1.0);
        self.record("alpha", alpha.to_string());
        self.record("beta", beta.to_string());
        Ok((alpha, beta))
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}

fn parse_value<T: FromStr>(key: &str, s: &str) -> Result<T, UsageError> {
    s.parse().map_err(|_| UsageError::new(key, format!("cannot parse `{s}`")))
}
