//! Deterministic report emission: CSV with a header row, or a JSON object
//! carrying a `schema_version`.  Identical configs produce byte-identical
//! output unless the timestamp is enabled.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use manin_core::Rat;
use serde_json::{Map, Value};

/// Floats are emitted with 15 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.14e}")
}

pub fn json_float(x: f64) -> Value {
    let quantized: f64 = fmt_float(x).parse().unwrap_or(x);
    serde_json::Number::from_f64(quantized)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Rationals keep their exact `p/q` form as strings.
pub fn json_rat(x: &Rat) -> Value {
    Value::String(x.to_string())
}

pub enum ReportBody {
    Csv {
        header: Vec<String>,
        rows: Vec<Vec<String>>,
    },
    Json(Value),
}

pub struct Report {
    pub body: ReportBody,
    pub timestamp: bool,
}

impl Report {
    pub fn json(mut map: Map<String, Value>, timestamp: bool) -> Self {
        map.insert("schema_version".into(), Value::from(1));
        if timestamp {
            map.insert("generated_at".into(), Value::String(now()));
        }
        Report {
            body: ReportBody::Json(Value::Object(map)),
            timestamp,
        }
    }

    pub fn csv(header: Vec<String>, rows: Vec<Vec<String>>, timestamp: bool) -> Self {
        Report {
            body: ReportBody::Csv { header, rows },
            timestamp,
        }
    }

    pub fn render(&self) -> String {
        match &self.body {
            ReportBody::Json(v) => format!("{}\n", serde_json::to_string_pretty(v).unwrap()),
            ReportBody::Csv { header, rows } => {
                let mut out = String::new();
                if self.timestamp {
                    out.push_str(&format!("# generated_at {}\n", now()));
                }
                out.push_str(&header.join(","));
                out.push('\n');
                for row in rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                out
            }
        }
    }

    pub fn write(&self, output: Option<&Path>) -> Result<()> {
        let text = self.render();
        match output {
            None => {
                std::io::stdout()
                    .write_all(text.as_bytes())
                    .context("writing report to stdout")?;
            }
            Some(path) => {
                std::fs::write(path, text)
                    .with_context(|| format!("writing report to {}", path.display()))?;
            }
        }
        Ok(())
    }
}

fn now() -> String {
    use std::time::{SystemTime, UNIX_EPOCH};
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_render_is_stable_without_timestamp() {
        let r = Report::csv(
            vec!["a".into(), "b".into()],
            vec![vec!["1".into(), "2".into()]],
            false,
        );
        assert_eq!(r.render(), "a,b\n1,2\n");
    }

    #[test]
    fn json_gets_schema_version() {
        let r = Report::json(Map::new(), false);
        let text = r.render();
        assert!(text.contains("\"schema_version\": 1"));
        assert!(!text.contains("generated_at"));
    }

    #[test]
    fn floats_have_fifteen_digits() {
        assert_eq!(fmt_float(std::f64::consts::PI), "3.14159265358979e0");
    }
}
