//! Dissociation scans: ground state plus sector spectra per geometry.

use std::path::PathBuf;

use anyhow::Result;
use log::{info, warn};
use serde::{Deserialize, Serialize};

use qsceom_core::ground_state::{AnsatzCircuit, GroundStateResult};
use qsceom_core::manifolds::Sector;

use crate::pipeline::{
    load_manifest, sector_roots, select_fixtures, AdaptSettings, EngineOptions, MethodChoice, MolecularSystem,
    HARTREE_TO_EV,
};
use crate::table::ResultRow;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_manifest")]
    pub manifest: PathBuf,
    /// `molecule/tag` selectors; `molecule/*` selects a whole grid.
    pub fixtures: Vec<String>,
    #[serde(default = "all_sectors")]
    pub sectors: Vec<Sector>,
    pub methods: Vec<MethodChoice>,
    /// Overrides the manifest's frozen-core count when set.
    #[serde(default)]
    pub n_frozen: Option<usize>,
    #[serde(default)]
    pub adapt: AdaptSettings,
    /// Roots reported per sector; all when absent.
    #[serde(default)]
    pub n_roots: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

pub fn default_manifest() -> PathBuf {
    PathBuf::from("fixtures/manifest.json")
}

fn all_sectors() -> Vec<Sector> {
    Sector::ALL.to_vec()
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        anyhow::ensure!(!self.fixtures.is_empty(), "scan needs at least one fixture");
        anyhow::ensure!(!self.methods.is_empty(), "scan needs at least one method");
        Ok(())
    }
}

/// Runs every (fixture, method, sector). Failures become error rows and the
/// scan continues.
pub fn run_scan(cfg: &ScanConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    if cfg.sectors.is_empty() {
        return Ok(Vec::new());
    }
    let (manifest, root) = load_manifest(&cfg.manifest)?;
    let mut rows = Vec::new();
    for sel in select_fixtures(&manifest, &cfg.fixtures) {
        let entry = match sel {
            Ok(e) => e,
            Err(name) => {
                warn!("fixture {name} not in manifest");
                rows.push(ResultRow::error_row(&name, "-", "-", "fixture not found"));
                continue;
            }
        };
        let tag = format!("{}/{}", entry.molecule, entry.tag);
        match scan_point(cfg, &root, entry, &tag) {
            Ok(mut r) => rows.append(&mut r),
            Err(e) => rows.push(ResultRow::error_row(&tag, "-", "-", &format!("{e:#}"))),
        }
    }
    Ok(rows)
}

fn ground_state_row(tag: &str, gs: &GroundStateResult, e_fci: f64) -> ResultRow {
    ResultRow {
        geometry_tag: tag.into(),
        method: "ADAPT-VQE".into(),
        sector: "GS".into(),
        root_index: 0,
        energy_hartree: Some(gs.energy),
        delta_e_hartree: Some(0.0),
        delta_e_ev: Some(0.0),
        error_vs_fci_hartree: Some(gs.energy - e_fci),
        flags: format!(
            "operators={};stop={:?}{}",
            gs.ansatz.len(),
            gs.stop,
            if gs.vqe_converged { "" } else { ";vqe_not_converged" }
        ),
    }
}

/// Ground-state rows for every selected fixture, and the ansatz of the last
/// one that converged.
pub fn run_ground_state(cfg: &ScanConfig) -> Result<(Vec<ResultRow>, Option<AnsatzCircuit>)> {
    cfg.validate()?;
    let (manifest, root) = load_manifest(&cfg.manifest)?;
    let mut rows = Vec::new();
    let mut last = None;
    for sel in select_fixtures(&manifest, &cfg.fixtures) {
        let entry = match sel {
            Ok(e) => e,
            Err(name) => {
                rows.push(ResultRow::error_row(&name, "ADAPT-VQE", "GS", "fixture not found"));
                continue;
            }
        };
        let tag = format!("{}/{}", entry.molecule, entry.tag);
        let run = || -> Result<(ResultRow, AnsatzCircuit)> {
            let sys = MolecularSystem::from_fixture(&root, entry, cfg.n_frozen)?;
            let gs = sys.adapt(&cfg.adapt)?;
            Ok((ground_state_row(&tag, &gs, sys.fci_ground()?), gs.ansatz))
        };
        match run() {
            Ok((row, ansatz)) => {
                rows.push(row);
                last = Some(ansatz);
            }
            Err(e) => rows.push(ResultRow::error_row(&tag, "ADAPT-VQE", "GS", &format!("{e:#}"))),
        }
    }
    Ok((rows, last))
}

fn scan_point(
    cfg: &ScanConfig,
    root: &std::path::Path,
    entry: &qsceom_core::chem_io::FixtureEntry,
    tag: &str,
) -> Result<Vec<ResultRow>> {
    let sys = MolecularSystem::from_fixture(root, entry, cfg.n_frozen)?;
    let e_fci = sys.fci_ground()?;
    let needs_gs = cfg.methods.iter().any(|m| *m != MethodChoice::Fci);
    let gs = if needs_gs { Some(sys.adapt(&cfg.adapt)?) } else { None };
    let mut rows = Vec::new();
    if let Some(gs) = &gs {
        info!("{tag}: ADAPT {} operators, E = {:.10}", gs.ansatz.len(), gs.energy);
        rows.push(ground_state_row(tag, gs, e_fci));
    }
    let opts = EngineOptions::default();
    for &method in &cfg.methods {
        for &sector in &cfg.sectors {
            let origin = if method == MethodChoice::Fci { e_fci } else { gs.as_ref().map_or(e_fci, |g| g.energy) };
            match sector_roots(&sys, gs.as_ref(), sector, method, &opts) {
                Ok(roots) => {
                    for (k, r) in roots.iter().take(cfg.n_roots.unwrap_or(usize::MAX)).enumerate() {
                        let mut flags = Vec::new();
                        if let Some(s) = r.sz2 {
                            flags.push(format!("sz2={s:+}"));
                        }
                        if r.imag.abs() > 1e-10 {
                            flags.push(format!("imag={:.3e}", r.imag));
                        }
                        rows.push(ResultRow {
                            geometry_tag: tag.into(),
                            method: method.to_string(),
                            sector: sector.to_string(),
                            root_index: k,
                            energy_hartree: Some(origin + r.delta_e),
                            delta_e_hartree: Some(r.delta_e),
                            delta_e_ev: Some(r.delta_e * HARTREE_TO_EV),
                            error_vs_fci_hartree: r.error(),
                            flags: flags.join(";"),
                        });
                    }
                }
                Err(e) => rows.push(ResultRow::error_row(tag, &method.to_string(), &sector.to_string(), &format!("{e:#}"))),
            }
        }
    }
    Ok(rows)
}
