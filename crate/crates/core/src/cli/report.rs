use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Tsv,
    Json,
    #[default]
    Pretty,
}

/// One rendered result: a JSON document plus a flat table view of it.
pub(crate) struct Report {
    pub title: String,
    pub json: Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new<T: Serialize>(title: impl Into<String>, json: &T, columns: Vec<&'static str>) -> Self {
        Report {
            title: title.into(),
            json: serde_json::to_value(json).expect("reports serialize"),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render<W: Write>(&self, format: ReportFormat, out: &mut W) -> io::Result<()> {
        match format {
            ReportFormat::Json => writeln!(out, "{}", self.json),
            ReportFormat::Tsv => {
                writeln!(out, "{}", self.columns.join("\t"))?;
                for r in &self.rows {
                    writeln!(out, "{}", r.join("\t"))?;
                }
                Ok(())
            }
            ReportFormat::Pretty => {
                let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
                for r in &self.rows {
                    for (w, cell) in widths.iter_mut().zip(r) {
                        *w = (*w).max(cell.chars().count());
                    }
                }
                let right: Vec<bool> = (0..widths.len())
                    .map(|i| i > 0 && !self.rows.is_empty() && self.rows.iter().all(|r| is_numeric(&r[i])))
                    .collect();
                writeln!(out, "{}", self.title)?;
                let line = |cells: &[String]| {
                    cells
                        .iter()
                        .zip(widths.iter().zip(&right))
                        .map(|(c, (w, r))| if *r { format!("{c:>w$}") } else { format!("{c:<w$}") })
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                let header: Vec<String> = self.columns.iter().map(|c| c.to_string()).collect();
                writeln!(out, "{}", line(&header).trim_end())?;
                writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1)))?;
                for r in &self.rows {
                    writeln!(out, "{}", line(r).trim_end())?;
                }
                Ok(())
            }
        }
    }
}

fn is_numeric(cell: &str) -> bool {
    cell == "-" || cell.parse::<f64>().is_ok()
}

pub(crate) fn num(x: f64) -> String {
    format!("{x:.4}")
}

pub(crate) fn pct(x: f64) -> String {
    format!("{x:.1}")
}

pub(crate) fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), num)
}
