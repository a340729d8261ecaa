//! Panel and dataset readers.
//!
//! A panel CSV has a header row, a `y` column first and one column per
//! candidate forecast. Per-candidate metadata lives in an optional JSON
//! sidecar; leave-one-out forecasts come from a second CSV with the same
//! candidate columns.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use weightscape_core::{DMatrix, DVector, ForecastPanel};

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
    #[error(transparent)]
    Panel(#[from] weightscape_core::Error),
}

fn malformed(path: &Path, message: impl Into<String>) -> InputError {
    InputError::Malformed {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Optional per-candidate metadata.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PanelMeta {
    /// Effective parameter counts `tr(P_s)`.
    #[serde(default)]
    pub q: Option<Vec<f64>>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    /// Correction vector of the KL criterion.
    #[serde(default)]
    pub phi: Option<Vec<f64>>,
    /// Residual variance for the Mallows criterion; estimated when absent.
    #[serde(default)]
    pub sigma2: Option<f64>,
}

/// Header and row-major numeric body of a CSV file.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table(path: &Path) -> Result<Table, InputError> {
    let file = File::open(path).map_err(|source| InputError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| malformed(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(malformed(path, "missing header row"));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(path, e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().map_err(|_| {
                    malformed(
                        path,
                        format!("row {}, column {}: cannot parse {cell:?}", i + 2, header[j]),
                    )
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(malformed(path, "no data rows"));
    }
    Ok(Table { header, rows })
}

fn columns_matrix(table: &Table, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(table.rows.len(), cols.len(), |r, c| table.rows[r][cols[c]])
}

pub fn read_meta(path: &Path) -> Result<PanelMeta, InputError> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| InputError::Io {
            path: path.display().to_string(),
            source,
        })?;
    serde_json::from_str(&text).map_err(|e| malformed(path, e.to_string()))
}

/// Reads a panel with optional sidecar metadata and leave-one-out forecasts.
/// Candidate labels default to the CSV header.
pub fn read_panel(
    path: &Path,
    meta: Option<&PanelMeta>,
    loo: Option<&Path>,
) -> Result<ForecastPanel, InputError> {
    let table = read_table(path)?;
    if table.header[0] != "y" {
        return Err(malformed(
            path,
            format!("first column must be `y`, found `{}`", table.header[0]),
        ));
    }
    if table.header.len() < 2 {
        return Err(malformed(path, "no forecast columns"));
    }
    let y = DVector::from_iterator(table.rows.len(), table.rows.iter().map(|r| r[0]));
    let f = columns_matrix(&table, &(1..table.header.len()).collect::<Vec<_>>());
    let labels = meta
        .and_then(|m| m.labels.clone())
        .unwrap_or_else(|| table.header[1..].to_vec());
    let mut panel = ForecastPanel::new(y, f)?.with_labels(labels)?;
    if let Some(q) = meta.and_then(|m| m.q.clone()) {
        panel = panel.with_q(q)?;
    }
    if let Some(loo_path) = loo {
        let loo_table = read_table(loo_path)?;
        if loo_table.header.len() != panel.s() {
            return Err(malformed(
                loo_path,
                format!(
                    "{} columns for {} candidates",
                    loo_table.header.len(),
                    panel.s()
                ),
            ));
        }
        let m = columns_matrix(&loo_table, &(0..panel.s()).collect::<Vec<_>>());
        panel = panel.with_loo(m)?;
    }
    Ok(panel.validated()?)
}

/// Regressors, target and regressor names.
pub type Dataset = (DMatrix<f64>, DVector<f64>, Vec<String>);

/// Regressors and target for conformal selection: a `y` column anywhere,
/// every other column a regressor.
pub fn read_xy(path: &Path) -> Result<Dataset, InputError> {
    let table = read_table(path)?;
    let yi = table
        .header
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| malformed(path, "no `y` column"))?;
    let xcols: Vec<usize> = (0..table.header.len()).filter(|&c| c != yi).collect();
    if xcols.is_empty() {
        return Err(malformed(path, "no regressor columns"));
    }
    let x = columns_matrix(&table, &xcols);
    let y = DVector::from_iterator(table.rows.len(), table.rows.iter().map(|r| r[yi]));
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(malformed(path, "non-finite entries"));
    }
    let names = xcols.iter().map(|&c| table.header[c].clone()).collect();
    Ok((x, y, names))
}

/// Writes a panel CSV in the layout `read_panel` accepts.
pub fn write_panel(path: &Path, panel: &ForecastPanel) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["y".to_string()];
    header.extend((1..=panel.s()).map(|s| format!("f{s}")));
    w.write_record(&header)?;
    for t in 0..panel.t() {
        let mut row = vec![panel.y[t].to_string()];
        row.extend(panel.f.row(t).iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()
}
