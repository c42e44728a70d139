//! Flat `key = value` text, one pair per line. Blank lines and lines starting
//! with `#` are ignored. Used for run configs, parameter files and summaries.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues {
    entries: Vec<(String, String)>,
}

#[derive(Debug, PartialEq)]
pub struct KvError(pub String);

impl std::fmt::Display for KvError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, KvError> {
        let mut kv = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| KvError(format!("line {}: expected `key = value`, got {line:?}", i + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(KvError(format!("line {}: empty key", i + 1)));
            }
            if kv.get(key).is_some() {
                return Err(KvError(format!("line {}: duplicate key {key:?}", i + 1)));
            }
            kv.entries.push((key.to_string(), value.trim().to_string()));
        }
        Ok(kv)
    }

    pub fn read(path: &Path) -> Result<Self, KvError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KvError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| KvError(format!("{}: {e}", path.display())))
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, KvError> {
        self.get(key).ok_or_else(|| KvError(format!("missing key {key:?}")))
    }

    pub fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, KvError>
    where
        T::Err: Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| KvError(format!("key {key:?}: cannot parse {v:?}: {e}")))
            })
            .transpose()
    }

    pub fn parse_required<T: FromStr>(&self, key: &str) -> Result<T, KvError>
    where
        T::Err: Display,
    {
        self.parse_opt(key)?
            .ok_or_else(|| KvError(format!("missing key {key:?}")))
    }

    /// A comma-separated list of reals; empty for an empty value.
    pub fn reals(&self, key: &str) -> Result<Vec<f64>, KvError> {
        let v = self.require(key)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| KvError(format!("key {key:?}: {s:?}: {e}")))
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

/// Reals joined by commas in their shortest round-trip form.
pub fn join_reals(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let kv = KeyValues::parse("# run\n dataset = IRIS \n\nruns=3\n").unwrap();
        assert_eq!(kv.get("dataset"), Some("IRIS"));
        assert_eq!(kv.parse_required::<usize>("runs").unwrap(), 3);
        assert_eq!(kv.get("seed"), None);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(KeyValues::parse("dataset IRIS").is_err());
        assert!(KeyValues::parse("a = 1\na = 2").is_err());
        assert!(KeyValues::parse(" = 2").is_err());
        let kv = KeyValues::parse("runs = many").unwrap();
        assert!(kv.parse_required::<usize>("runs").is_err());
    }

    #[test]
    fn reals_round_trip() {
        let values = [0.1, -2.5e-9, 1e300, 3.0];
        let mut kv = KeyValues::new();
        kv.push("w", join_reals(&values));
        let back = KeyValues::parse(&kv.to_text()).unwrap().reals("w").unwrap();
        assert_eq!(back, values);
    }
}
