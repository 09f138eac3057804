use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::args::Format;
use crate::CliError;

/// A cell: numbers are printed in full precision, labels verbatim.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn numeric_column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows
            .iter()
            .map(|r| match r[i] {
                Cell::Num(v) => Some(v),
                Cell::Text(_) => None,
            })
            .collect()
    }

    /// Header row plus one line per record, every line newline-terminated.
    /// Numbers use 17 significant digits, enough to round-trip an f64.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Num(v) => write!(out, "{v:.16e}").unwrap(),
                    Cell::Text(t) => out.push_str(t),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("tables serialize");
                s.push('\n');
                s
            }
        }
    }
}

/// Parses CSV written by [`Table::to_csv`] back into a table.
pub fn parse_csv(text: &str) -> Result<Table, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty input")?;
    let mut table = Table::new(header.split(','));
    for (n, line) in lines.enumerate() {
        let row: Vec<Cell> = line
            .split(',')
            .map(|f| {
                f.parse::<f64>()
                    .map(Cell::Num)
                    .unwrap_or_else(|_| Cell::Text(f.to_string()))
            })
            .collect();
        if row.len() != table.columns.len() {
            return Err(format!(
                "line {}: expected {} fields, got {}",
                n + 2,
                table.columns.len(),
                row.len()
            ));
        }
        table.rows.push(row);
    }
    Ok(table)
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}
