use std::borrow::Cow;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::Result;
use crate::VERSION;

/// Resolved run configuration, echoed in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub command: String,
    pub entries: Vec<(String, String)>,
}

impl Config {
    pub fn new(command: &str) -> Self {
        Config {
            command: command.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        for (k, v) in &self.entries {
            m.insert(k.clone(), Value::String(v.clone()));
        }
        Value::Object(m)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Quotes a field when it holds a comma, quote or line break (RFC 4180).
pub fn csv_field(s: &str) -> Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        Cow::Owned(format!("\"{}\"", s.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(s)
    }
}

/// Shortest round-trip decimal for a float.
pub fn fnum(x: f64) -> String {
    format!("{x}")
}

pub fn render_csv(config: &Config, table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {VERSION}\n"));
    out.push_str(&format!("# command = {}\n", config.command));
    for (k, v) in &config.entries {
        out.push_str(&format!("# {k} = {}\n", v.replace('\n', " ")));
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .map(|c| csv_field(c).into_owned())
            .collect::<Vec<_>>()
            .join(",")
    };
    out.push_str(&line(&table.columns));
    out.push('\n');
    for row in &table.rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// JSON summary; floats must already be strings (see [`fnum`]).
pub fn render_summary(config: &Config, summary: &Map<String, Value>) -> String {
    let mut m = Map::new();
    m.insert("version".into(), Value::String(VERSION.into()));
    m.insert("config".into(), config.to_json());
    m.insert("summary".into(), Value::Object(summary.clone()));
    let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("plain JSON values");
    s.push('\n');
    s
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `out.csv` → `out.json`; a path without extension gets `.json` appended.
pub fn summary_path(out: &Path) -> PathBuf {
    if out.extension().is_some() {
        out.with_extension("json")
    } else {
        let mut s = out.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }
}
