//! Flat key=value configuration files.
//!
//! The schema is the set of long flag names of the subcommand being run
//! (without the leading dashes). Unknown keys are hard errors carrying the
//! line number; explicit command-line flags always override file values.

use std::collections::HashMap;

use anyhow::{anyhow, bail, Result};

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn parse(text: &str, allowed_keys: &[&str]) -> Result<Self> {
        let mut values = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {}: expected key=value, got {raw:?}", idx + 1);
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !allowed_keys.contains(&key.as_str()) {
                bail!(
                    "config line {}: unknown key {key:?} (allowed: {})",
                    idx + 1,
                    allowed_keys.join(", ")
                );
            }
            if values.insert(key.clone(), value).is_some() {
                bail!("config line {}: duplicate key {key:?}", idx + 1);
            }
        }
        Ok(FileConfig { values })
    }

    pub fn load(path: &std::path::Path, allowed_keys: &[&str]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text, allowed_keys)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// Flag value if given, else the file value parsed with `parse`, else
    /// `default`.
    pub fn resolve<T, F>(&self, flag: Option<T>, key: &str, parse: F, default: T) -> Result<T>
    where
        F: Fn(&str) -> Result<T>,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.get(key) {
            Some(s) => parse(s).map_err(|e| anyhow!("config key {key:?}: {e}")),
            None => Ok(default),
        }
    }

    /// Flag value if given, else the raw file string, else `None`.
    pub fn resolve_opt(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.get(key).map(String::from))
    }

    /// Like [`resolve_opt`](Self::resolve_opt) with a parser for file values.
    pub fn resolve_opt_with<T, F>(&self, flag: Option<T>, key: &str, parse: F) -> Result<Option<T>>
    where
        F: Fn(&str) -> Result<T>,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            Some(s) => parse(s)
                .map(Some)
                .map_err(|e| anyhow!("config key {key:?}: {e}")),
            None => Ok(None),
        }
    }

    /// Like [`resolve`](Self::resolve) but the value is required.
    pub fn resolve_required<T, F>(&self, flag: Option<T>, key: &str, parse: F) -> Result<T>
    where
        F: Fn(&str) -> Result<T>,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.get(key) {
            Some(s) => parse(s).map_err(|e| anyhow!("config key {key:?}: {e}")),
            None => bail!("missing required value {key:?} (flag or config key)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves() {
        let c = FileConfig::parse("m = 2\ndelta=2.5\n# comment\n\nt=1\n", &["m", "delta", "t"])
            .unwrap();
        assert_eq!(c.get("m"), Some("2"));
        let t: f64 = c
            .resolve(None, "t", |s| Ok(s.parse()?), 9.0)
            .unwrap();
        assert_eq!(t, 1.0);
        // flag precedence
        let t: f64 = c
            .resolve(Some(2.0), "t", |s| Ok(s.parse()?), 9.0)
            .unwrap();
        assert_eq!(t, 2.0);
    }

    #[test]
    fn unknown_key_names_line_and_key() {
        let err = FileConfig::parse("m=2\ndetla=2.5\n", &["m", "delta"])
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(err.contains("detla"), "{err}");
    }
}
