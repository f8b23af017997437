//! Tabular output in markdown, CSV or JSON.

use std::io::Write;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Md,
    Csv,
    Json,
}

/// One cell. Markdown rounds probabilities to 3 decimals and expected depths
/// to 2; CSV and JSON keep full precision.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Prob(f64),
    Med(f64),
    Real(f64),
    Bool(bool),
    Missing,
}

impl Cell {
    fn md(&self) -> String {
        match self {
            Cell::Text(s) => s.replace('|', "\\|"),
            Cell::Int(v) => v.to_string(),
            Cell::Prob(v) => format!("{v:.3}"),
            Cell::Med(v) => format!("{v:.2}"),
            Cell::Real(v) if v.fract() == 0.0 && v.abs() < 1e15 => format!("{v:.0}"),
            Cell::Real(v) => format!("{v:.4}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => "NA".into(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Prob(v) | Cell::Med(v) | Cell::Real(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => "NA".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Int(v) => Value::from(*v),
            Cell::Prob(v) | Cell::Med(v) | Cell::Real(v) => Value::from(*v),
            Cell::Bool(b) => Value::from(*b),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    /// Key used for JSON objects and CSV section markers.
    pub name: String,
    pub title: String,
    /// `(key, markdown label)`.
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<Cell>>,
    /// Print markdown with rows and columns swapped (the first column becomes the header).
    pub transpose_md: bool,
}

impl Table {
    pub fn new(name: &str, title: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            name: name.into(),
            title: title.into(),
            columns: columns.iter().map(|(k, l)| (k.to_string(), l.to_string())).collect(),
            rows: Vec::new(),
            transpose_md: false,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write_md(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "### {}\n", self.title)?;
        let grid: Vec<Vec<String>> = if self.transpose_md {
            self.columns
                .iter()
                .enumerate()
                .map(|(c, (_, label))| {
                    std::iter::once(label.clone())
                        .chain(self.rows.iter().map(|r| r[c].md()))
                        .collect()
                })
                .collect()
        } else {
            std::iter::once(self.columns.iter().map(|(_, l)| l.clone()).collect())
                .chain(self.rows.iter().map(|r| r.iter().map(Cell::md).collect()))
                .collect()
        };
        let Some((head, body)) = grid.split_first() else {
            return Ok(());
        };
        writeln!(out, "| {} |", head.join(" | "))?;
        writeln!(out, "|{}|", vec!["---"; head.len()].join("|"))?;
        for row in body {
            writeln!(out, "| {} |", row.join(" | "))?;
        }
        Ok(())
    }

    fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.columns.iter().map(|(k, _)| k))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|((k, _), c)| (k.clone(), c.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Writes one or more tables. Several CSV tables are separated by a blank
/// line and introduced by a `# name` line; several JSON tables form an object
/// keyed by name.
pub fn write_tables(tables: &[Table], format: Format, out: &mut impl Write) -> std::io::Result<()> {
    match format {
        Format::Md => {
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                t.write_md(out)?;
            }
        }
        Format::Csv => {
            let many = tables.len() > 1;
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                if many {
                    writeln!(out, "# {}", t.name)?;
                }
                t.write_csv(out)?;
            }
        }
        Format::Json => {
            let value = if let [t] = tables {
                t.to_json()
            } else {
                Value::Object(tables.iter().map(|t| (t.name.clone(), t.to_json())).collect())
            };
            serde_json::to_writer_pretty(&mut *out, &value)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
