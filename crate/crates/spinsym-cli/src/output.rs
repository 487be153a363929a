//! CSV tables and JSON summaries.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

/// Version of the JSON summary layout.
pub const SCHEMA_VERSION: u32 = 1;

/// A float cell with 17 significant digits, which round-trips every f64.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Rows of string cells under a fixed header.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    fn write_to(&self, out: impl Write) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }
}

/// What a subcommand produces: a table and a summary object.
pub struct Report {
    pub table: Table,
    pub summary: Map<String, Value>,
}

impl Report {
    pub fn new(table: Table) -> Self {
        Report { table, summary: Map::new() }
    }

    pub fn set(&mut self, key: &str, value: impl serde::Serialize) {
        self.summary.insert(key.to_string(), serde_json::to_value(value).expect("summary values serialize"));
    }

    fn summary_json(&self, command: &str, config: &Value) -> Value {
        let mut root = Map::new();
        root.insert("schema_version".into(), json!(SCHEMA_VERSION));
        root.insert("command".into(), json!(command));
        root.insert("config".into(), config.clone());
        root.insert("rows".into(), json!(self.table.len()));
        root.extend(self.summary.clone());
        Value::Object(root)
    }
}

/// Where the artifacts go. With a path prefix both `<prefix>.csv` and
/// `<prefix>.json` are written; otherwise one of them goes to stdout.
pub enum Sink {
    Files(PathBuf),
    StdoutCsv,
    StdoutJson,
}

impl Sink {
    pub fn emit(&self, report: &Report, command: &str, config: &Value) -> io::Result<()> {
        let summary = report.summary_json(command, config);
        match self {
            Sink::Files(prefix) => {
                if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir)?;
                }
                report.table.write_to(fs::File::create(with_suffix(prefix, "csv"))?)?;
                let mut f = fs::File::create(with_suffix(prefix, "json"))?;
                serde_json::to_writer_pretty(&mut f, &summary)?;
                writeln!(f)
            }
            Sink::StdoutCsv => report.table.write_to(io::stdout().lock()),
            Sink::StdoutJson => {
                let mut out = io::stdout().lock();
                serde_json::to_writer_pretty(&mut out, &summary)?;
                writeln!(out)
            }
        }
    }
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}
