//! Gnuplot data blocks from result tables.
//!
//! One block per series, blocks separated by two blank lines so that
//! `index k` selects series `k`. Rows within a block are sorted by the axis.

use std::fmt::Write as _;

use crate::csv::Table;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    /// Series label (`param=value`), empty when the table has no series.
    pub labels: Vec<String>,
    pub data: String,
    pub script: String,
}

impl PlotData {
    pub fn block_count(&self) -> usize {
        self.labels.len()
    }
}

/// `data_file` is the name the script uses to refer to the data.
pub fn emit_plotdata(table: &Table, data_file: &str) -> Result<PlotData> {
    if table.header.len() < 2 {
        return Err(CliError::Csv { line: 1, message: "need an axis and at least one metric".into() });
    }
    let axis = &table.header[0];
    // label -> (metric names, column indices), in first-appearance order
    let mut groups: Vec<(String, Vec<String>, Vec<usize>)> = Vec::new();
    for (j, h) in table.header.iter().enumerate().skip(1) {
        let (metric, label) = match h.split_once('@') {
            Some((m, l)) => (m.to_string(), l.to_string()),
            None => (h.clone(), String::new()),
        };
        match groups.iter_mut().find(|g| g.0 == label) {
            Some(g) => {
                g.1.push(metric);
                g.2.push(j);
            }
            None => groups.push((label, vec![metric], vec![j])),
        }
    }
    let mut rows: Vec<&Vec<f64>> = table.rows.iter().collect();
    rows.sort_by(|a, b| a[0].total_cmp(&b[0]));

    let mut data = String::new();
    for (k, (label, metrics, cols)) in groups.iter().enumerate() {
        if k > 0 {
            data.push_str("\n\n");
        }
        writeln!(data, "# series {}", if label.is_empty() { "-" } else { label }).unwrap();
        writeln!(data, "# {axis} {}", metrics.join(" ")).unwrap();
        for r in &rows {
            write!(data, "{:?}", r[0]).unwrap();
            for &j in cols {
                write!(data, " {:?}", r[j]).unwrap();
            }
            data.push('\n');
        }
    }

    let mut script = String::new();
    writeln!(script, "set datafile commentschars '#'").unwrap();
    writeln!(script, "set xlabel '{axis}'").unwrap();
    writeln!(script, "set key outside").unwrap();
    let plots: Vec<String> = groups
        .iter()
        .enumerate()
        .map(|(k, (label, metrics, _))| {
            let title = if label.is_empty() { metrics[0].clone() } else { format!("{} {label}", metrics[0]) };
            format!("'{data_file}' index {k} using 1:2 with linespoints title '{title}'")
        })
        .collect();
    writeln!(script, "plot {}", plots.join(", \\\n     ")).unwrap();

    Ok(PlotData { labels: groups.into_iter().map(|g| g.0).collect(), data, script })
}
