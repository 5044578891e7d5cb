use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Serialize)]
struct Header<'a> {
    schema_version: u32,
    command: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    #[serde(flatten)]
    header: &'a Header<'a>,
    #[serde(flatten)]
    body: &'a T,
}

/// Writes every artifact of one run under a directory, each carrying the
/// resolved config and seed.
pub struct Output<'a> {
    dir: PathBuf,
    format: Format,
    header: Header<'a>,
}

impl<'a> Output<'a> {
    pub fn new(dir: &Path, format: Format, command: &'a str, config: &'a ExperimentConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        let header = Header { schema_version: SCHEMA_VERSION, command, seed: config.seed, config };
        Ok(Self { dir: dir.to_path_buf(), format, header })
    }

    pub fn table(&self, name: &str, table: &Table) -> Result<PathBuf, CliError> {
        match self.format {
            Format::Csv => {
                let path = self.dir.join(format!("{name}.csv"));
                let mut out = std::io::BufWriter::new(fs::File::create(&path)?);
                writeln!(out, "# {}", serde_json::to_string(&self.header).expect("header serializes"))?;
                writeln!(out, "{}", table.columns.join(","))?;
                for row in &table.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    writeln!(out, "{}", cells.join(","))?;
                }
                out.flush()?;
                Ok(path)
            }
            Format::Json => self.json(name, table),
        }
    }

    /// `name.json` regardless of the table format.
    pub fn json<T: Serialize>(&self, name: &str, body: &T) -> Result<PathBuf, CliError> {
        let path = self.dir.join(format!("{name}.json"));
        let document = Document { header: &self.header, body };
        let mut text = serde_json::to_string_pretty(&document).expect("report serializes");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
