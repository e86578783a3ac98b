//! From integrals to sector-resolved roots for every method.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use qsceom_core::chem_io::{freeze_core, read_fcidump, to_spin_orbitals, FixtureEntry, FixtureManifest, MolecularIntegrals};
use qsceom_core::eom::{
    build_m_direct, build_qeom, build_qse, solve_paired_geneig, solve_qse, solve_qsceom, Method, OperatorDressing,
    SpectrumResult, CANONICAL_THRESHOLD,
};
use qsceom_core::ground_state::{adapt_vqe, build_gsd_pool, reference_mask, AdaptOptions, GroundStateResult, VqeOptions};
use qsceom_core::manifolds::{enumerate_manifold, Sector};
use qsceom_core::operator_algebra::{build_qubit_hamiltonian, PauliSum};
use qsceom_core::oracles::{fci_sector_spectrum, SectorSpectrum};
use qsceom_core::statevector::{CompiledOperator, Statevector};

/// Energies closer than this are merged when the two spin channels of a
/// charged sector are combined.
pub const MERGE_TOL: f64 = 1e-9;

pub const HARTREE_TO_EV: f64 = 27.211386245988;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptSettings {
    pub grad_threshold: f64,
    pub max_operators: Option<usize>,
    pub vqe_gtol: f64,
    pub vqe_max_iterations: usize,
}

impl Default for AdaptSettings {
    fn default() -> Self {
        let vqe = VqeOptions::default();
        Self { grad_threshold: 1e-3, max_operators: None, vqe_gtol: vqe.gtol, vqe_max_iterations: vqe.max_iterations }
    }
}

impl AdaptSettings {
    pub fn options(&self) -> AdaptOptions {
        AdaptOptions {
            grad_threshold: self.grad_threshold,
            max_operators: self.max_operators,
            vqe: VqeOptions { gtol: self.vqe_gtol, max_iterations: self.vqe_max_iterations },
        }
    }
}

/// A closed-shell molecule ready for simulation.
pub struct MolecularSystem {
    pub label: String,
    pub integrals: MolecularIntegrals,
    pub hamiltonian: PauliSum,
    pub compiled: CompiledOperator,
}

impl MolecularSystem {
    pub fn from_integrals(label: impl Into<String>, integrals: MolecularIntegrals) -> Result<Self> {
        if integrals.ms2 != 0 || !integrals.n_electrons.is_multiple_of(2) {
            bail!("only closed-shell references are supported (N={}, MS2={})", integrals.n_electrons, integrals.ms2);
        }
        let hamiltonian = build_qubit_hamiltonian(&to_spin_orbitals(&integrals));
        let compiled = CompiledOperator::new(&hamiltonian)?;
        Ok(Self { label: label.into(), integrals, hamiltonian, compiled })
    }

    /// Loads a manifest entry relative to `root`, freezing `n_frozen` core
    /// orbitals (the manifest value when `None`).
    pub fn from_fixture(root: &Path, entry: &FixtureEntry, n_frozen: Option<usize>) -> Result<Self> {
        let path = root.join(&entry.path);
        let mi = read_fcidump(&path).with_context(|| format!("reading {}", path.display()))?;
        let mi = freeze_core(&mi, n_frozen.unwrap_or(entry.n_frozen))?;
        Self::from_integrals(format!("{}/{}", entry.molecule, entry.tag), mi)
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.integrals.n_spatial
    }

    pub fn n_electrons(&self) -> usize {
        self.integrals.n_electrons
    }

    pub fn n_occ(&self) -> usize {
        self.n_electrons()
    }

    pub fn n_virt(&self) -> usize {
        self.n_qubits() - self.n_electrons()
    }

    pub fn reference(&self) -> Statevector {
        let mask = reference_mask(self.n_electrons(), 0).expect("closed shell checked on construction");
        Statevector::basis_state(mask, self.n_qubits()).expect("register size checked on construction")
    }

    pub fn adapt(&self, settings: &AdaptSettings) -> Result<GroundStateResult> {
        let pool = build_gsd_pool(self.n_qubits());
        Ok(adapt_vqe(&self.compiled, &self.reference(), &pool, settings.options())?)
    }

    pub fn fci_sector(&self, particle_change: i32, sz2: Option<i32>) -> Result<SectorSpectrum> {
        let n = self.n_electrons() as i32 + particle_change;
        if n < 0 {
            bail!("negative electron count");
        }
        Ok(fci_sector_spectrum(&self.hamiltonian, n as usize, sz2)?)
    }

    pub fn fci_ground(&self) -> Result<f64> {
        Ok(self.fci_sector(0, Some(0))?.ground())
    }
}

/// Resolves the manifest next to the fixtures directory.
pub fn load_manifest(path: &Path) -> Result<(FixtureManifest, PathBuf)> {
    let manifest = FixtureManifest::load(path)?;
    let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((manifest, root))
}

/// Expands `mol/tag` selectors; `mol/*` selects every tag of a molecule.
pub fn select_fixtures<'a>(manifest: &'a FixtureManifest, selectors: &[String]) -> Vec<Result<&'a FixtureEntry, String>> {
    let mut out = Vec::new();
    for sel in selectors {
        match sel.split_once('/') {
            Some((mol, "*")) => {
                let found = manifest.molecule(mol);
                if found.is_empty() {
                    out.push(Err(sel.clone()));
                }
                out.extend(found.into_iter().map(Ok));
            }
            Some((mol, tag)) => out.push(manifest.find(mol, tag).ok_or_else(|| sel.clone())),
            None => out.push(Err(sel.clone())),
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MethodChoice {
    #[serde(rename = "QSCEOM")]
    QscEom,
    #[serde(rename = "QEOM")]
    Qeom,
    #[serde(rename = "QSE")]
    Qse,
    #[serde(rename = "FCI")]
    Fci,
}

impl std::fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MethodChoice::QscEom => "QSCEOM",
            MethodChoice::Qeom => "QEOM",
            MethodChoice::Qse => "QSE",
            MethodChoice::Fci => "FCI",
        })
    }
}

impl std::str::FromStr for MethodChoice {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "").as_str() {
            "QSCEOM" => Ok(Self::QscEom),
            "QEOM" => Ok(Self::Qeom),
            "QSE" => Ok(Self::Qse),
            "FCI" => Ok(Self::Fci),
            _ => Err(anyhow!("unknown method {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub qse_include_identity: bool,
    pub qeom_dressing: OperatorDressing,
    pub threshold: f64,
    /// Twice-Sz channels to run; `None` uses the sector defaults.
    pub sz_filters: Option<Vec<Option<i32>>>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            qse_include_identity: true,
            qeom_dressing: OperatorDressing::Bare,
            threshold: CANONICAL_THRESHOLD,
            sz_filters: None,
        }
    }
}

/// One root with its matched exact reference.
#[derive(Clone, Debug, PartialEq)]
pub struct RootRecord {
    /// Change in twice-Sz of the spin channel the root came from.
    pub sz2: Option<i32>,
    pub delta_e: f64,
    pub imag: f64,
    /// Exact energy difference of the same-index state in the same channel.
    pub fci_delta: Option<f64>,
}

impl RootRecord {
    pub fn error(&self) -> Option<f64> {
        self.fci_delta.map(|f| self.delta_e - f)
    }
}

/// Exact `ΔE` values in one spin channel of a sector; the EE channel omits
/// the ground state itself.
pub fn fci_channel_deltas(sys: &MolecularSystem, sector: Sector, sz2: Option<i32>, e0: f64) -> Result<Vec<f64>> {
    let spec = sys.fci_sector(sector.particle_change(), sz2)?;
    let skip = usize::from(sector == Sector::EE);
    Ok(spec.eigenvalues.iter().skip(skip).map(|e| e - e0).collect())
}

/// Spectrum of one method in one spin channel.
pub fn channel_spectrum(
    sys: &MolecularSystem,
    gs: &GroundStateResult,
    sector: Sector,
    sz2: Option<i32>,
    method: Method,
    opts: &EngineOptions,
) -> Result<SpectrumResult> {
    let m = enumerate_manifold(sector, sys.n_occ(), sys.n_virt(), sz2)?;
    Ok(match method {
        Method::QscEom => solve_qsceom(&build_m_direct(gs, &sys.compiled, &m)?)?,
        Method::Qeom => solve_paired_geneig(&build_qeom(gs, &sys.compiled, &m, opts.qeom_dressing)?, opts.threshold)?,
        Method::Qse => solve_qse(&build_qse(gs, &sys.compiled, &m, opts.qse_include_identity)?, opts.threshold)?,
    })
}

/// Roots of `method` in `sector`, both spin channels merged for IP/EA,
/// ascending, each matched index-wise to FCI within its own channel.
pub fn sector_roots(
    sys: &MolecularSystem,
    gs: Option<&GroundStateResult>,
    sector: Sector,
    method: MethodChoice,
    opts: &EngineOptions,
) -> Result<Vec<RootRecord>> {
    let e0 = sys.fci_ground()?;
    let filters: Vec<Option<i32>> = match &opts.sz_filters {
        Some(f) => f.clone(),
        None => sector.default_sz_filters().into_iter().map(Some).collect(),
    };
    let mut merged: Vec<RootRecord> = Vec::new();
    for sz2 in filters {
        let fci = fci_channel_deltas(sys, sector, sz2, e0)?;
        let roots: Vec<(f64, f64)> = match method {
            MethodChoice::Fci => fci.iter().map(|d| (*d, 0.0)).collect(),
            other => {
                let gs = gs.ok_or_else(|| anyhow!("{other} needs a ground state"))?;
                let method = match other {
                    MethodChoice::QscEom => Method::QscEom,
                    MethodChoice::Qeom => Method::Qeom,
                    _ => Method::Qse,
                };
                channel_spectrum(sys, gs, sector, sz2, method, opts)?
                    .roots
                    .iter()
                    .map(|r| (r.delta_e, r.imag))
                    .collect()
            }
        };
        // A root already produced by an earlier channel (the other spin
        // component of the same state) is dropped; each earlier root absorbs
        // at most one root of this channel.
        let earlier = merged.len();
        let mut absorbed = vec![false; earlier];
        for (k, (d, im)) in roots.into_iter().enumerate() {
            let twin = (0..earlier).find(|&j| !absorbed[j] && (merged[j].delta_e - d).abs() <= MERGE_TOL);
            match twin {
                Some(j) => absorbed[j] = true,
                None => merged.push(RootRecord { sz2, delta_e: d, imag: im, fci_delta: fci.get(k).copied() }),
            }
        }
    }
    merged.sort_by(|a, b| a.delta_e.total_cmp(&b.delta_e));
    Ok(merged)
}

/// Largest `|ΔE − ΔE_FCI|` over the first `n_roots` roots (all if `None`).
pub fn max_abs_error(roots: &[RootRecord], n_roots: Option<usize>) -> f64 {
    roots
        .iter()
        .take(n_roots.unwrap_or(usize::MAX))
        .filter_map(RootRecord::error)
        .fold(0.0, |m, e| m.max(e.abs()))
}
