//! Matrix-perturbation noise study.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use num_complex::Complex64;
use qsceom_core::eom::{build_m_direct, build_qse, solve_qse, solve_qsceom, EomMatrixSet, CANONICAL_THRESHOLD};
use qsceom_core::linalg::CMatrix;
use qsceom_core::manifolds::{enumerate_manifold, Sector};

use crate::pipeline::{load_manifest, AdaptSettings, MethodChoice, MolecularSystem};
use crate::scan::default_manifest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseVariant {
    /// Both `H_sub` and `S_sub` are perturbed.
    PerturbAll,
    /// `S_sub` is left exact.
    ExactOverlap,
}

impl std::fmt::Display for NoiseVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseVariant::PerturbAll => "perturb_all",
            NoiseVariant::ExactOverlap => "exact_overlap",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseStudyConfig {
    #[serde(default = "default_manifest")]
    pub manifest: PathBuf,
    #[serde(default = "default_fixture")]
    pub fixture: String,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_variants")]
    pub variants: Vec<NoiseVariant>,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodChoice>,
    #[serde(default = "default_roots")]
    pub n_roots: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub adapt: AdaptSettings,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_fixture() -> String {
    "h4/b1.50_d2.00".into()
}

/// Six log-spaced points from 1e-8 to 1e-3.
pub fn default_epsilons() -> Vec<f64> {
    (0..6).map(|k| 10f64.powi(k - 8)).collect()
}

fn default_trials() -> usize {
    2000
}

fn default_seed() -> u64 {
    20240917
}

fn default_variants() -> Vec<NoiseVariant> {
    vec![NoiseVariant::PerturbAll, NoiseVariant::ExactOverlap]
}

fn default_methods() -> Vec<MethodChoice> {
    vec![MethodChoice::QscEom, MethodChoice::Qse]
}

fn default_roots() -> usize {
    3
}

fn default_threshold() -> f64 {
    CANONICAL_THRESHOLD
}

impl Default for NoiseStudyConfig {
    fn default() -> Self {
        Self {
            manifest: default_manifest(),
            fixture: default_fixture(),
            epsilons: default_epsilons(),
            n_trials: default_trials(),
            seed: default_seed(),
            variants: default_variants(),
            methods: default_methods(),
            n_roots: default_roots(),
            threshold: default_threshold(),
            adapt: AdaptSettings::default(),
            output: None,
        }
    }
}

impl NoiseStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            bail!("epsilons must be a nonempty list of positive numbers");
        }
        if self.n_trials == 0 {
            bail!("n_trials must be at least 1");
        }
        if self.n_roots == 0 {
            bail!("n_roots must be at least 1");
        }
        if let Some(m) = self.methods.iter().find(|m| !matches!(m, MethodChoice::QscEom | MethodChoice::Qse)) {
            bail!("noise study supports QSCEOM and QSE, not {m}");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub geometry_tag: String,
    pub method: String,
    /// `none` for q-sc-EOM, which has no overlap matrix.
    pub variant: String,
    pub epsilon: f64,
    pub n_trials: usize,
    pub n_flagged: usize,
    pub mean_error_hartree: Option<f64>,
    pub std_error_hartree: Option<f64>,
    pub flags: String,
}

pub const NOISE_COLUMNS: [&str; 9] = [
    "geometry_tag",
    "method",
    "variant",
    "epsilon",
    "n_trials",
    "n_flagged",
    "mean_error_hartree",
    "std_error_hartree",
    "flags",
];

/// Noise-free matrices of one geometry with their reference spectra.
pub struct NoiseBase {
    pub geometry_tag: String,
    pub qsceom: EomMatrixSet,
    pub qse: EomMatrixSet,
    pub n_roots: usize,
    pub threshold: f64,
    clean_qsceom: Vec<f64>,
    clean_qse: Vec<f64>,
    clean_rank: usize,
}

impl NoiseBase {
    pub fn new(geometry_tag: String, qsceom: EomMatrixSet, qse: EomMatrixSet, n_roots: usize, threshold: f64) -> Result<Self> {
        let clean_qsceom = solve_qsceom(&qsceom)?.delta_energies();
        let clean = solve_qse(&qse, threshold)?;
        let clean_rank = qse.h_sub.as_ref().map_or(0, |h| h.nrows()) - clean.diagnostics.discarded_directions;
        let clean_qse = clean.delta_energies();
        if clean_qsceom.len() < n_roots || clean_qse.len() < n_roots {
            bail!("fewer than {n_roots} noise-free roots");
        }
        Ok(Self { geometry_tag, qsceom, qse, n_roots, threshold, clean_qsceom, clean_qse, clean_rank })
    }

    /// Mean `|ΔE_k(noisy) − ΔE_k(clean)|` over the first `n_roots` roots, or
    /// `None` when the trial is flagged (QSE rank change or failed solve).
    pub fn trial_error(&self, method: MethodChoice, variant: NoiseVariant, epsilon: f64, rng: &mut ChaCha8Rng) -> Option<f64> {
        let noisy: Vec<f64> = match method {
            MethodChoice::QscEom => {
                let mut set = self.qsceom.clone();
                set.m = set.m.as_ref().map(|m| perturb_hermitian(m, epsilon, rng));
                solve_qsceom(&set).ok()?.delta_energies()
            }
            _ => {
                let mut set = self.qse.clone();
                set.h_sub = set.h_sub.as_ref().map(|h| perturb_hermitian(h, epsilon, rng));
                if variant == NoiseVariant::PerturbAll {
                    set.s_sub = set.s_sub.as_ref().map(|s| perturb_hermitian(s, epsilon, rng));
                }
                let r = solve_qse(&set, self.threshold).ok()?;
                let rank = set.h_sub.as_ref().map_or(0, |h| h.nrows()) - r.diagnostics.discarded_directions;
                if rank != self.clean_rank {
                    return None;
                }
                r.delta_energies()
            }
        };
        let clean = if method == MethodChoice::QscEom { &self.clean_qsceom } else { &self.clean_qse };
        if noisy.len() < self.n_roots {
            return None;
        }
        let total: f64 = (0..self.n_roots).map(|k| (noisy[k] - clean[k]).abs()).sum();
        Some(total / self.n_roots as f64)
    }
}

/// Adds independent `U[−ε, ε]` offsets to the real part of every upper
/// triangle element (diagonal included) and mirrors them.
pub fn perturb_hermitian(m: &CMatrix, epsilon: f64, rng: &mut impl Rng) -> CMatrix {
    let mut out = m.clone();
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            let d = if epsilon > 0.0 { rng.random_range(-epsilon..=epsilon) } else { 0.0 };
            out[(i, j)] += Complex64::new(d, 0.0);
            if i != j {
                out[(j, i)] += Complex64::new(d, 0.0);
            }
        }
    }
    out
}

/// Generator of trial `trial` at grid point `eps_index`.
pub fn trial_rng(seed: u64, eps_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((eps_index as u64) << 32) | trial as u64);
    rng
}

/// Aggregates per-trial errors in index order.
pub fn summarize(errors: &[Option<f64>]) -> (usize, Option<f64>, Option<f64>) {
    let kept: Vec<f64> = errors.iter().flatten().copied().collect();
    let flagged = errors.len() - kept.len();
    if kept.is_empty() {
        return (flagged, None, None);
    }
    let n = kept.len() as f64;
    let mean = kept.iter().sum::<f64>() / n;
    let sem = if kept.len() > 1 {
        let var = kept.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    (flagged, Some(mean), Some(sem))
}

/// Builds the noise-free matrices for the configured geometry.
pub fn build_noise_base(cfg: &NoiseStudyConfig) -> Result<NoiseBase> {
    let (manifest, root) = load_manifest(&cfg.manifest)?;
    let (mol, tag) = cfg.fixture.split_once('/').ok_or_else(|| anyhow!("bad fixture selector {:?}", cfg.fixture))?;
    let entry = manifest.find(mol, tag).ok_or_else(|| anyhow!("fixture {} not in manifest", cfg.fixture))?;
    let sys = MolecularSystem::from_fixture(&root, entry, None)?;
    let gs = sys.adapt(&cfg.adapt)?;
    let m = enumerate_manifold(Sector::EE, sys.n_occ(), sys.n_virt(), Some(0))?;
    let qsceom = build_m_direct(&gs, &sys.compiled, &m)?;
    let qse = build_qse(&gs, &sys.compiled, &m, true)?;
    NoiseBase::new(cfg.fixture.clone(), qsceom, qse, cfg.n_roots, cfg.threshold)
}

pub fn run_noise_study(cfg: &NoiseStudyConfig) -> Result<Vec<NoiseRow>> {
    cfg.validate()?;
    let base = build_noise_base(cfg)?;
    Ok(noise_table(&base, cfg))
}

/// One row per (method, variant, ε). Trials run in parallel; every trial
/// draws from its own substream so totals do not depend on scheduling.
pub fn noise_table(base: &NoiseBase, cfg: &NoiseStudyConfig) -> Vec<NoiseRow> {
    let mut runs: Vec<(MethodChoice, Option<NoiseVariant>)> = Vec::new();
    for &m in &cfg.methods {
        match m {
            MethodChoice::Qse => runs.extend(cfg.variants.iter().map(|v| (m, Some(*v)))),
            _ => runs.push((m, None)),
        }
    }
    let mut rows = Vec::new();
    for (method, variant) in runs {
        for (ei, &eps) in cfg.epsilons.iter().enumerate() {
            let errors: Vec<Option<f64>> = (0..cfg.n_trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(cfg.seed, ei, t);
                    base.trial_error(method, variant.unwrap_or(NoiseVariant::PerturbAll), eps, &mut rng)
                })
                .collect();
            let (n_flagged, mean, sem) = summarize(&errors);
            rows.push(NoiseRow {
                geometry_tag: base.geometry_tag.clone(),
                method: method.to_string(),
                variant: variant.map_or("none".into(), |v| v.to_string()),
                epsilon: eps,
                n_trials: cfg.n_trials,
                n_flagged,
                mean_error_hartree: mean,
                std_error_hartree: sem,
                flags: if n_flagged > 0 { format!("rank_changed={n_flagged}") } else { String::new() },
            });
        }
    }
    rows
}
