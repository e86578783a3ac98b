//! CSV output with a JSON mirror.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// One row of a scan or spectrum table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub geometry_tag: String,
    pub method: String,
    pub sector: String,
    pub root_index: usize,
    pub energy_hartree: Option<f64>,
    pub delta_e_hartree: Option<f64>,
    pub delta_e_ev: Option<f64>,
    pub error_vs_fci_hartree: Option<f64>,
    pub flags: String,
}

impl ResultRow {
    pub fn error_row(geometry_tag: &str, method: &str, sector: &str, message: &str) -> Self {
        Self {
            geometry_tag: geometry_tag.into(),
            method: method.into(),
            sector: sector.into(),
            root_index: 0,
            energy_hartree: None,
            delta_e_hartree: None,
            delta_e_ev: None,
            error_vs_fci_hartree: None,
            flags: format!("error={}", message.replace(['\n', ','], " ")),
        }
    }
}

pub const RESULT_COLUMNS: [&str; 9] = [
    "geometry_tag",
    "method",
    "sector",
    "root_index",
    "energy_hartree",
    "delta_e_hartree",
    "delta_e_ev",
    "error_vs_fci_hartree",
    "flags",
];

/// CSV text for `rows`, with a header row even when `rows` is empty.
pub fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner().context("flushing CSV")?)?)
}

pub fn json_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `path` as CSV and the same rows as a JSON array next to it.
pub fn write_table<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, to_csv(rows, header)?).with_context(|| format!("writing {}", path.display()))?;
    let json = serde_json::to_string_pretty(rows)?;
    let jp = json_path(path);
    fs::write(&jp, json + "\n").with_context(|| format!("writing {}", jp.display()))?;
    Ok(())
}
