//! Config-driven experiments on top of `qsceom-core`: dissociation scans,
//! size-intensivity and matrix-noise studies, with CSV/JSON output.

pub mod noise;
pub mod pipeline;
pub mod scan;
pub mod size;
pub mod table;

use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;

/// Reads a TOML config file.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
