//! Numeric CSV tables: one header row, comma separated, no quoting.

use std::fmt::Write as _;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Numbers use Rust's shortest round-trip formatting (`{:?}`, which
    /// switches to exponent form for very small or large magnitudes), so
    /// output is byte-stable across platforms.
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                write!(s, "{v:?}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or(CliError::Csv { line: 1, message: "empty file".into() })?;
        let header: Vec<String> = head.split(',').map(|h| h.trim().to_string()).collect();
        if header.iter().any(String::is_empty) {
            return Err(CliError::Csv { line: 1, message: "empty column name".into() });
        }
        let mut table = Table::new(header);
        for (i, l) in lines {
            let cells: Vec<&str> = l.split(',').collect();
            if cells.len() != table.header.len() {
                return Err(CliError::Csv {
                    line: i + 1,
                    message: format!("expected {} cells, found {}", table.header.len(), cells.len()),
                });
            }
            let row = cells
                .iter()
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Csv { line: i + 1, message: format!("not a number: '{c}'") })
                })
                .collect::<Result<Vec<f64>>>()?;
            table.rows.push(row);
        }
        Ok(table)
    }
}
