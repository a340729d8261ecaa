//! Result tables, one file per metric with a row per (case, set).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use weightscape_core::simulation::{CellSummary, Column, MetricSummary};

use crate::grid::ScenarioOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Markdown => "md",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(format!("unknown table format `{other}` (csv or markdown)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Ssr,
    Bias,
    Msfe,
    Sparsity,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Ssr, Metric::Bias, Metric::Msfe, Metric::Sparsity];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Ssr => "ssr",
            Metric::Bias => "bias",
            Metric::Msfe => "msfe",
            Metric::Sparsity => "sparsity",
        }
    }

    /// Mean over replications; SSR in units of 10⁴.
    fn value(self, cell: &CellSummary) -> Option<f64> {
        let pick = |m: Option<MetricSummary>| m.map(|s| s.mean);
        match self {
            Metric::Ssr => pick(cell.ssr).map(|v| v * 1e-4),
            Metric::Bias => pick(cell.bias),
            Metric::Msfe => pick(cell.msfe),
            Metric::Sparsity => pick(cell.sparsity_pct),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("no scenario results to tabulate")]
    Empty,
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn cell_text(v: Option<f64>, format: Format) -> String {
    match (v, format) {
        (None, _) => "NA".to_string(),
        (Some(x), Format::Csv) => x.to_string(),
        (Some(x), Format::Markdown) => format!("{x:.3}"),
    }
}

pub fn render(
    outcomes: &[ScenarioOutcome],
    columns: &[Column],
    metric: Metric,
    format: Format,
) -> String {
    let mut header = vec!["case".to_string(), "set".to_string()];
    header.extend(columns.iter().map(Column::to_string));
    let rows: Vec<Vec<String>> = outcomes
        .iter()
        .map(|o| {
            let mut row = vec![o.spec.case.to_string(), o.spec.set.to_string()];
            row.extend(
                columns
                    .iter()
                    .map(|c| {
                        o.summary
                            .iter()
                            .find(|s| s.column == *c)
                            .and_then(|s| metric.value(s))
                    })
                    .map(|v| cell_text(v, format)),
            );
            row
        })
        .collect();

    let mut out = String::new();
    match format {
        Format::Csv => {
            for line in std::iter::once(&header).chain(&rows) {
                writeln!(out, "{}", line.join(",")).unwrap();
            }
        }
        Format::Markdown => {
            writeln!(out, "| {} |", header.join(" | ")).unwrap();
            writeln!(out, "|{}", "---|".repeat(header.len())).unwrap();
            for row in &rows {
                writeln!(out, "| {} |", row.join(" | ")).unwrap();
            }
        }
    }
    out
}

/// Writes `ssr`, `bias`, `msfe` and `sparsity` tables into `dir`.
pub fn emit_tables(
    outcomes: &[ScenarioOutcome],
    columns: &[Column],
    format: Format,
    dir: &Path,
) -> Result<Vec<PathBuf>, TableError> {
    if outcomes.is_empty() {
        return Err(TableError::Empty);
    }
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| TableError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    Metric::ALL
        .iter()
        .map(|&m| {
            let path = dir.join(format!("{}.{}", m.name(), format.extension()));
            std::fs::write(&path, render(outcomes, columns, m, format)).map_err(io_err(&path))?;
            Ok(path)
        })
        .collect()
}
