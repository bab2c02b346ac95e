//! Artifact writers. Every file goes through [`Outputs`], which records its
//! checksum once the file is closed.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One emitted file, as listed in the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

/// A table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// Shortest round-trip rendering; non-finite values as `NaN`, `inf`, `-inf`.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        serde_json::Number::from_f64(v).expect("finite").to_string()
    }
}

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json_value(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) if v.is_finite() => serde_json::Value::from(*v),
            Cell::Num(v) => serde_json::Value::String(format_number(*v)),
            Cell::Int(v) => serde_json::Value::from(*v),
            Cell::Bool(v) => serde_json::Value::from(*v),
            Cell::Text(s) => serde_json::Value::from(s.as_str()),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

enum Sink {
    Csv(csv::Writer<BufWriter<File>>),
    Json { out: BufWriter<File>, first: bool },
}

/// Streaming long-format table. JSON tables are written as
/// `{"columns": [...], "rows": [[...], ...]}`.
pub struct TableWriter {
    path: PathBuf,
    width: usize,
    sink: Sink,
}

impl TableWriter {
    pub fn row(&mut self, cells: &[Cell]) -> Result<()> {
        assert_eq!(cells.len(), self.width, "row width does not match header");
        let path = &self.path;
        match &mut self.sink {
            Sink::Csv(w) => w
                .write_record(cells.iter().map(Cell::csv_text))
                .map_err(|e| CliError::io(path, e.into())),
            Sink::Json { out, first } => {
                let sep = if *first { "\n    " } else { ",\n    " };
                *first = false;
                let values: Vec<_> = cells.iter().map(Cell::json_value).collect();
                let line = serde_json::to_string(&values).expect("cells serialise");
                write!(out, "{sep}{line}").map_err(|e| CliError::io(path, e))
            }
        }
    }

    fn close(self) -> Result<PathBuf> {
        let path = self.path;
        match self.sink {
            Sink::Csv(mut w) => w.flush().map_err(|e| CliError::io(&path, e))?,
            Sink::Json { mut out, .. } => {
                out.write_all(b"\n  ]\n}\n").and_then(|_| out.flush()).map_err(|e| CliError::io(&path, e))?
            }
        }
        Ok(path)
    }
}

/// Output directory plus the running list of emitted artifacts.
pub struct Outputs {
    dir: PathBuf,
    format: Format,
    records: Vec<ArtifactRecord>,
}

impl Outputs {
    pub fn create(dir: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            records: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn format(&self) -> Format {
        self.format
    }

    fn create_file(&self, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        Ok((path, BufWriter::new(file)))
    }

    pub fn table(&mut self, stem: &str, columns: &[&str]) -> Result<TableWriter> {
        let name = format!("{stem}.{}", self.format.extension());
        let (path, out) = self.create_file(&name)?;
        let sink = match self.format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(columns).map_err(|e| CliError::io(&path, e.into()))?;
                Sink::Csv(w)
            }
            Format::Json => {
                let mut out = out;
                let header = serde_json::to_string(columns).expect("strings serialise");
                write!(out, "{{\n  \"columns\": {header},\n  \"rows\": [").map_err(|e| CliError::io(&path, e))?;
                Sink::Json { out, first: true }
            }
        };
        Ok(TableWriter {
            path,
            width: columns.len(),
            sink,
        })
    }

    pub fn finish(&mut self, table: TableWriter) -> Result<()> {
        let path = table.close()?;
        self.record(&path)
    }

    /// Pretty-printed JSON document, regardless of the table format.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let (path, mut out) = self.create_file(name)?;
        serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::io(&path, e.into()))?;
        out.write_all(b"\n").and_then(|_| out.flush()).map_err(|e| CliError::io(&path, e))?;
        self.record(&path)
    }

    fn record(&mut self, path: &Path) -> Result<()> {
        let (sha256, bytes) = sha256_file(path)?;
        let file = path.file_name().expect("file path").to_string_lossy().into_owned();
        self.records.push(ArtifactRecord { file, sha256, bytes });
        Ok(())
    }

    pub fn records(&self) -> &[ArtifactRecord] {
        &self.records
    }
}
