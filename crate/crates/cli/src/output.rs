//! Output plumbing: metadata block, CSV text, atomic file writes.

use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
}

/// Header carried by every output file. No timestamps or thread counts, so
/// repeated runs produce identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub geometry: rpr_analytic::GeometryParams,
    pub tol: f64,
    pub seed: u64,
}

impl Meta {
    fn csv_lines(&self) -> String {
        let g = &self.geometry;
        format!(
            "# tool: {} {}\n# command: {}\n# geometry: c2={} c3={} d3={} l2={} l3={} beta={}\n# tol: {:e}\n# seed: {}\n",
            self.tool, self.version, self.command, g.c2, g.c3, g.d3, g.l2, g.l3, g.beta, self.tol, self.seed
        )
    }

    fn svg_comment(&self) -> String {
        format!("<!--\n{}-->\n", self.csv_lines().replace("--", "- -"))
    }
}

/// Round-trip-exact float: 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(meta: &Meta, columns: &[&str]) -> Self {
        let mut text = meta.csv_lines();
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// JSON document `{"meta": ..., <body fields>}`.
pub fn json_document(meta: &Meta, body: serde_json::Value) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("meta".into(), serde_json::to_value(meta).expect("meta serializes"));
    if let serde_json::Value::Object(fields) = body {
        doc.extend(fields);
    } else {
        doc.insert("result".into(), body);
    }
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(doc)).expect("json serializes");
    s.push('\n');
    s
}

/// What a subcommand produced. Files are named `<stem><suffix>`.
#[derive(Default)]
pub struct Outputs {
    pub json: Option<String>,
    pub csv: Option<String>,
    pub svgs: Vec<(String, String)>,
}

impl Outputs {
    pub fn svg(&mut self, meta: &Meta, suffix: impl Into<String>, body: String) {
        let text = match body.split_once('\n') {
            Some((decl, rest)) => format!("{decl}\n{}{rest}", meta.svg_comment()),
            None => body,
        };
        self.svgs.push((suffix.into(), text));
    }

    /// With a stem, writes every file; without one, prints the JSON report
    /// (or the CSV when there is no report) to stdout.
    pub fn emit(&self, stem: Option<&Path>) -> Result<Vec<PathBuf>, OutputError> {
        let Some(stem) = stem else {
            let text = self.json.as_deref().or(self.csv.as_deref()).unwrap_or("");
            print!("{text}");
            let _ = std::io::stdout().flush();
            return Ok(vec![]);
        };
        let mut written = Vec::new();
        let files = self
            .json
            .iter()
            .map(|t| (".json".to_string(), t))
            .chain(self.csv.iter().map(|t| (".csv".to_string(), t)))
            .chain(self.svgs.iter().map(|(s, t)| (s.clone(), t)));
        for (suffix, text) in files {
            let mut name = stem.as_os_str().to_owned();
            name.push(&suffix);
            let path = PathBuf::from(name);
            write_atomic(&path, text.as_bytes())?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    let err = |source| OutputError::Write { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<String, OutputError> {
    std::fs::read_to_string(path).map_err(|source| OutputError::Read { path: path.to_path_buf(), source })
}
