use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "hsl.result/1";

/// Outcome of one built-in check shipped alongside a payload.
#[derive(Clone, Debug, Serialize)]
pub struct CheckFlag {
    pub name: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultEnvelope {
    pub schema: &'static str,
    pub tool: Tool,
    pub config: Value,
    pub wall_clock_seconds: f64,
    pub payload: Value,
    pub checks: Vec<CheckFlag>,
    /// Per-step wall-clock; kept out of the payload so payloads stay
    /// reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Value>,
}

impl ResultEnvelope {
    pub fn new(config: Value, payload: Value, checks: Vec<CheckFlag>, seconds: f64) -> Self {
        ResultEnvelope {
            schema: SCHEMA,
            tool: Tool { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") },
            config,
            wall_clock_seconds: seconds,
            payload,
            checks,
            timings: None,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Rows for the CSV projection: named columns plus one value per column.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// Fallback projection: every scalar leaf of `v` as a `(path, value)` row.
    pub fn flatten(v: &Value) -> Self {
        let mut t = Table::new(&["path", "value"]);
        flatten_into(v, String::new(), &mut t.rows);
        t
    }

    pub fn to_csv(&self) -> io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| io::Error::other(e.to_string()))
    }
}

pub fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten_into(v: &Value, path: String, out: &mut Vec<Vec<String>>) {
    let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten_into(x, join(k), out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten_into(x, join(&i.to_string()), out);
            }
        }
        leaf => out.push(vec![path, scalar(leaf)]),
    }
}

/// Write `bytes` to `path` through a sibling temp file and a rename, or to
/// stdout when no path is given.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match path {
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            fs::create_dir_all(dir)?;
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(p).map_err(|e| e.error)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flatten_paths() {
        let t = Table::flatten(&json!({"a": {"b": [1, "x"]}, "c": null}));
        assert_eq!(t.rows, vec![vec!["a.b.0", "1"], vec!["a.b.1", "x"], vec!["c", ""]]);
    }

    #[test]
    fn csv_quotes_fields() {
        let mut t = Table::new(&["h", "h'"]);
        t.push(vec!["x1 + 1".into(), "a,b".into()]);
        assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "h,h'\nx1 + 1,\"a,b\"\n");
    }

    #[test]
    fn write_replaces_existing_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.json");
        write_output(Some(&p), b"old").unwrap();
        write_output(Some(&p), b"new").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"new");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn envelope_flags() {
        let mut env = ResultEnvelope::new(json!({}), json!(1), Vec::new(), 0.0);
        assert!(env.all_passed());
        env.checks.push(CheckFlag { name: "x".into(), passed: false });
        assert!(!env.all_passed());
        let v = serde_json::to_value(&env).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert!(v.get("timings").is_none());
    }
}
