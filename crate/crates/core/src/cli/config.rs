//! Flat `section.key = value` configuration files.
//!
//! ```text
//! # comment
//! problem.name = damped-oscillator
//! method.T = 0.04
//! ```

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

fn check_key(key: &str) -> Result<()> {
    let mut parts = key.split('.');
    let ok = matches!((parts.next(), parts.next(), parts.next()), (Some(s), Some(k), None) if !s.is_empty() && !k.is_empty());
    let ok = ok && key.chars().all(|c| c.is_ascii_alphanumeric() || "._-".contains(c));
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("invalid key `{key}`; expected `section.key`")))
    }
}

impl KvConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            check_key(k).map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
            if cfg.entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", n + 1)));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets or replaces a key.
    pub fn set(&mut self, key: &str, value: impl Display) -> Result<()> {
        check_key(key)?;
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Keys of one section, without the section prefix.
    pub fn section(&self, section: &str) -> Vec<(&str, &str)> {
        let prefix = format!("{section}.");
        self.entries.iter().filter_map(|(k, v)| k.strip_prefix(&prefix).map(|rest| (rest, v.as_str()))).collect()
    }

    pub fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.get(key).map(|v| v.parse::<T>().map_err(|e| Error::Config(format!("`{key}` = `{v}`: {e}")))).transpose()
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.parse_opt(key)?.unwrap_or(default))
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        self.parse_opt(key)?.ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    /// Comma-separated list.
    pub fn list_opt<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: Display,
    {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().parse::<T>().map_err(|e| Error::Config(format!("`{key}` = `{v}`: {e}"))))
                    .collect()
            })
            .transpose()
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let cfg =
            KvConfig::parse("# header\nproblem.name = lorenz  # trailing\n\nnet.hidden = 64, 64\nmethod.T=0.04\n")
                .unwrap();
        assert_eq!(cfg.get("problem.name"), Some("lorenz"));
        assert_eq!(cfg.list_opt::<usize>("net.hidden").unwrap(), Some(vec![64, 64]));
        assert_eq!(cfg.required::<f64>("method.T").unwrap(), 0.04);
        assert_eq!(cfg.section("problem"), vec![("name", "lorenz")]);
        assert_eq!(KvConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["problem.name", "name = x", "a.b.c = 1", "a.b = 1\na.b = 2", ".x = 1"] {
            assert!(matches!(KvConfig::parse(bad), Err(Error::Config(_))), "{bad}");
        }
        let cfg = KvConfig::parse("train.updates = many").unwrap();
        assert!(matches!(cfg.required::<u64>("train.updates"), Err(Error::Config(_))));
        assert!(matches!(cfg.required::<u64>("train.batch"), Err(Error::Config(_))));
    }
}
