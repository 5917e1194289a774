//! File emission. Every file carries the resolved configuration and the tool
//! version: CSV in a leading `#` comment line, JSON in a `meta` field, SVG in
//! its `<metadata>` element.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Resolved;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn meta(config: &Resolved) -> Value {
    json!({ "tool": "pairsirs", "version": VERSION, "config": config })
}

/// Collects output files and writes them one at a time.
pub struct Writer {
    dir: PathBuf,
    meta: Value,
    pub written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(config: &Resolved) -> Result<Self, CliError> {
        fs::create_dir_all(&config.out)?;
        Ok(Self { dir: config.out.clone(), meta: meta(config), written: Vec::new() })
    }

    pub fn meta(&self) -> &Value {
        &self.meta
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    /// CSV with a `# {meta}` line followed by a header row.
    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.path(name);
        let mut file = fs::File::create(&path)?;
        writeln!(file, "# {}", self.meta)?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(path)
    }

    /// JSON object holding `meta` and the fields of `body`.
    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<PathBuf, CliError> {
        let mut value = serde_json::to_value(body)?;
        match &mut value {
            Value::Object(map) => {
                map.insert("meta".into(), self.meta.clone());
            }
            other => value = json!({ "meta": self.meta.clone(), "data": other.take() }),
        }
        let path = self.path(name);
        fs::write(&path, serde_json::to_string_pretty(&value)? + "\n")?;
        Ok(path)
    }

    pub fn svg(&mut self, name: &str, doc: crate::svg::Svg) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, doc.finish(&self.meta))?;
        Ok(path)
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn read_meta_line(path: &Path) -> Option<Value> {
    let text = fs::read_to_string(path).ok()?;
    serde_json::from_str(text.lines().next()?.strip_prefix("# ")?).ok()
}
