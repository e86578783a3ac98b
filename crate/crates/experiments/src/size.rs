//! Size-intensivity check on a non-interacting composite of two fragments.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};

use qsceom_core::chem_io::{direct_sum, freeze_core, read_fcidump, spatial_of, MolecularIntegrals};
use qsceom_core::eom::{Method, SpectrumResult};
use qsceom_core::ground_state::GroundStateResult;
use qsceom_core::manifolds::{enumerate_manifold, Sector};

use crate::pipeline::{channel_spectrum, load_manifest, AdaptSettings, EngineOptions, MethodChoice, MolecularSystem};
use crate::scan::default_manifest;

/// Composite roots farther than this from an isolated root never match it.
pub const MATCH_WINDOW: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeIntensivityConfig {
    #[serde(default = "default_manifest")]
    pub manifest: PathBuf,
    /// Fragment whose excitations are compared, as `molecule/tag`.
    #[serde(default = "default_fragment")]
    pub fragment: String,
    /// Spectator fragment added without interaction.
    #[serde(default = "default_spectator")]
    pub spectator: String,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodChoice>,
    #[serde(default = "truncated_adapt")]
    pub adapt: AdaptSettings,
    /// Twice-Sz channel of the compared excitations.
    #[serde(default)]
    pub sz2: i32,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_fragment() -> String {
    "h2/r0.75".into()
}

fn default_spectator() -> String {
    "h4/b1.50_d2.00".into()
}

fn default_methods() -> Vec<MethodChoice> {
    vec![MethodChoice::QscEom, MethodChoice::Qse]
}

pub fn truncated_adapt() -> AdaptSettings {
    AdaptSettings { max_operators: Some(3), ..AdaptSettings::default() }
}

impl Default for SizeIntensivityConfig {
    fn default() -> Self {
        Self {
            manifest: default_manifest(),
            fragment: default_fragment(),
            spectator: default_spectator(),
            methods: default_methods(),
            adapt: truncated_adapt(),
            sz2: 0,
            output: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeRow {
    pub geometry_tag: String,
    pub method: String,
    pub sector: String,
    pub root_index: usize,
    pub isolated_delta_e_hartree: f64,
    pub composite_delta_e_hartree: Option<f64>,
    pub difference_hartree: Option<f64>,
    /// Share of the composite root's amplitude on fragment-local operators.
    pub fragment_weight: Option<f64>,
    pub flags: String,
}

pub const SIZE_COLUMNS: [&str; 9] = [
    "geometry_tag",
    "method",
    "sector",
    "root_index",
    "isolated_delta_e_hartree",
    "composite_delta_e_hartree",
    "difference_hartree",
    "fragment_weight",
    "flags",
];

fn load_fragment(manifest_path: &Path, selector: &str) -> Result<MolecularIntegrals> {
    let (manifest, root) = load_manifest(manifest_path)?;
    let (mol, tag) = selector.split_once('/').ok_or_else(|| anyhow!("bad fixture selector {selector:?}"))?;
    let entry = manifest.find(mol, tag).ok_or_else(|| anyhow!("fixture {selector} not in manifest"))?;
    let path = root.join(&entry.path);
    let mi = read_fcidump(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(freeze_core(&mi, entry.n_frozen)?)
}

/// Maps each composite spin orbital to whether it belongs to the first
/// fragment, following the orbital order of `direct_sum`.
fn fragment_orbitals(a: &MolecularIntegrals, b: &MolecularIntegrals) -> Vec<bool> {
    let (occ_a, occ_b) = (a.n_electrons / 2, b.n_electrons / 2);
    let n = a.n_spatial + b.n_spatial;
    (0..2 * n)
        .map(|k| {
            let p = spatial_of(k);
            p < occ_a || (p >= occ_a + occ_b && p < occ_b + a.n_spatial)
        })
        .collect()
}

/// Fraction of `|c|²` carried by operators acting only on the fragment.
fn fragment_weight(amplitudes: &[f64], local: &[bool]) -> f64 {
    let total: f64 = amplitudes.iter().sum();
    let on: f64 = amplitudes.iter().zip(local).filter(|(_, l)| **l).map(|(a, _)| a).sum();
    if total > 0.0 {
        on / total
    } else {
        0.0
    }
}

fn solve(sys: &MolecularSystem, gs: &GroundStateResult, method: MethodChoice, sz2: i32) -> Result<SpectrumResult> {
    let m = match method {
        MethodChoice::QscEom => Method::QscEom,
        MethodChoice::Qeom => Method::Qeom,
        MethodChoice::Qse => Method::Qse,
        MethodChoice::Fci => return Err(anyhow!("FCI has no truncated-ansatz spectrum to compare")),
    };
    channel_spectrum(sys, gs, Sector::EE, Some(sz2), m, &EngineOptions::default())
}

/// Compares each isolated-fragment excitation with the nearest composite
/// root dominated by fragment-local operators.
pub fn run_size_intensivity(cfg: &SizeIntensivityConfig) -> Result<Vec<SizeRow>> {
    let a = load_fragment(&cfg.manifest, &cfg.fragment)?;
    let b = load_fragment(&cfg.manifest, &cfg.spectator)?;
    let iso = MolecularSystem::from_integrals(cfg.fragment.clone(), a.clone())?;
    let comp = MolecularSystem::from_integrals(format!("{}+{}", cfg.fragment, cfg.spectator), direct_sum(&a, &b)?)?;
    let gs_iso = iso.adapt(&cfg.adapt)?;
    let gs_comp = comp.adapt(&cfg.adapt)?;
    let local_orb = fragment_orbitals(&a, &b);
    let manifold = enumerate_manifold(Sector::EE, comp.n_occ(), comp.n_virt(), Some(cfg.sz2))?;
    let local_entry: Vec<bool> =
        manifold.entries.iter().map(|e| e.indices().iter().all(|&k| local_orb[k])).collect();
    let ansatz_flag = format!(
        "composite_operators={};composite_local_operators={}",
        gs_comp.ansatz.len(),
        gs_comp
            .ansatz
            .ops
            .iter()
            .filter(|(ex, _)| ex.creators.iter().chain(&ex.annihilators).all(|&k| local_orb[k]))
            .count()
    );
    let mut rows = Vec::new();
    for &method in &cfg.methods {
        let isolated = solve(&iso, &gs_iso, method, cfg.sz2)?;
        let composite = solve(&comp, &gs_comp, method, cfg.sz2)?;
        let candidates: Vec<(f64, f64)> = composite
            .roots
            .iter()
            .map(|r| {
                // QSE with the identity carries one leading coefficient for |Ψ⟩.
                let skip = r.amplitudes.len() - manifold.len();
                let weights: Vec<f64> = r.amplitudes.iter().skip(skip).map(|c| c.norm_sqr()).collect();
                (r.delta_e, fragment_weight(&weights, &local_entry))
            })
            .filter(|(_, w)| *w > 0.5)
            .collect();
        let mut used = vec![false; candidates.len()];
        for (k, r) in isolated.roots.iter().enumerate() {
            let best = (0..candidates.len())
                .filter(|&j| !used[j] && (candidates[j].0 - r.delta_e).abs() <= MATCH_WINDOW)
                .min_by(|&x, &y| {
                    (candidates[x].0 - r.delta_e).abs().total_cmp(&(candidates[y].0 - r.delta_e).abs())
                });
            let mut row = SizeRow {
                geometry_tag: format!("{}+{}", cfg.fragment, cfg.spectator),
                method: method.to_string(),
                sector: Sector::EE.to_string(),
                root_index: k,
                isolated_delta_e_hartree: r.delta_e,
                composite_delta_e_hartree: None,
                difference_hartree: None,
                fragment_weight: None,
                flags: ansatz_flag.clone(),
            };
            match best {
                Some(j) => {
                    used[j] = true;
                    row.composite_delta_e_hartree = Some(candidates[j].0);
                    row.difference_hartree = Some(candidates[j].0 - r.delta_e);
                    row.fragment_weight = Some(candidates[j].1);
                }
                None => row.flags.push_str(";unmatched"),
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fragment_orbitals_follow_direct_sum_order() {
        let a = MolecularIntegrals::zeros(2, 2, 0);
        let b = MolecularIntegrals::zeros(4, 4, 0);
        // Spatial order: a-occ, b-occ, b-occ, a-virt, b-virt, b-virt.
        let spatial: Vec<bool> = fragment_orbitals(&a, &b).iter().step_by(2).copied().collect();
        assert_eq!(spatial, vec![true, false, false, true, false, false]);
    }

    #[test]
    fn weights_are_fractions() {
        assert_eq!(fragment_weight(&[1.0, 3.0], &[true, false]), 0.25);
        assert_eq!(fragment_weight(&[0.0, 0.0], &[true, false]), 0.0);
    }
}
