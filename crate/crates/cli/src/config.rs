//! Flat key=value config files and the validated run configuration.
//!
//! Every flag can also be given in the config file under the same name
//! (without the leading dashes); command-line values win.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Clone, Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {} is not key=value: `{line}`", lineno + 1);
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }
}

/// Merge a CLI-provided value with the config-file fallback.
pub fn merge<T: Clone>(
    cli: Option<T>,
    file: Option<&str>,
    parse: impl Fn(&str) -> Result<T>,
) -> Result<Option<T>> {
    if cli.is_some() {
        return Ok(cli);
    }
    match file {
        Some(raw) => Ok(Some(parse(raw)?)),
        None => Ok(None),
    }
}

/// Parse a possibly scientific-notation positive integer like `1e6` or
/// `300000`.
pub fn parse_count(s: &str) -> Result<u64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().with_context(|| format!("bad integer `{s}`"))?;
    if !(f.is_finite() && (0.0..=9e18).contains(&f) && (f.fract() == 0.0 || f > 1e6)) {
        bail!("`{s}` is not a usable integer");
    }
    Ok(f.round() as u64)
}

/// Comma-separated strictly increasing grid of counts.
pub fn parse_grid(s: &str) -> Result<Vec<u64>> {
    let mut grid = Vec::new();
    for piece in s.split(',') {
        grid.push(parse_count(piece)?);
    }
    if grid.is_empty() {
        bail!("empty grid");
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        bail!("grid must be strictly increasing: {grid:?}");
    }
    Ok(grid)
}

pub fn parse_tolerance(s: &str) -> Result<f64> {
    let t: f64 = s.parse().with_context(|| format!("bad tolerance `{s}`"))?;
    if !(t > 0.0 && t.is_finite()) {
        bail!("tolerance must be positive and finite, got {t}");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values_and_comments() {
        let c = FileConfig::parse("# comment\nmodel = ex1\npmax=1000\n\n").unwrap();
        assert_eq!(c.get("model"), Some("ex1"));
        assert_eq!(c.get("pmax"), Some("1000"));
        assert_eq!(c.get("missing"), None);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(FileConfig::parse("just words").is_err());
    }

    #[test]
    fn cli_wins_over_file() {
        let got = merge(Some(5u64), Some("7"), |s| Ok(s.parse()?)).unwrap();
        assert_eq!(got, Some(5));
        let got = merge(None, Some("7"), |s| Ok(s.parse::<u64>()?)).unwrap();
        assert_eq!(got, Some(7));
    }

    #[test]
    fn count_and_grid_parsing() {
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_count("12345").unwrap(), 12345);
        assert!(parse_count("abc").is_err());
        assert_eq!(
            parse_grid("1e4,3e4,1e5").unwrap(),
            vec![10_000, 30_000, 100_000]
        );
        assert!(parse_grid("100,100").is_err());
        assert!(parse_grid("200,100").is_err());
    }

    #[test]
    fn tolerance_validation() {
        assert!(parse_tolerance("-1").is_err());
        assert!(parse_tolerance("0").is_err());
        assert_eq!(parse_tolerance("1e-6").unwrap(), 1e-6);
    }
}
