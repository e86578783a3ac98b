//! Determinant-space CI built straight from spatial integrals, sharing no
//! code with the qubit-Hamiltonian path.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use qsceom_core::chem_io::{read_fcidump, FixtureManifest, MolecularIntegrals};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn manifest() -> FixtureManifest {
    FixtureManifest::load(fixtures_dir().join("manifest.json")).expect("manifest")
}

pub fn load(molecule: &str, tag: &str) -> MolecularIntegrals {
    let m = manifest();
    let e = m.find(molecule, tag).expect("fixture in manifest");
    read_fcidump(fixtures_dir().join(&e.path)).expect("FCIDUMP")
}

fn annihilate(det: u64, k: usize) -> Option<(f64, u64)> {
    if det >> k & 1 == 0 {
        return None;
    }
    let below = (det & ((1u64 << k) - 1)).count_ones();
    Some((if below.is_multiple_of(2) { 1.0 } else { -1.0 }, det & !(1u64 << k)))
}

fn create(det: u64, k: usize) -> Option<(f64, u64)> {
    if det >> k & 1 == 1 {
        return None;
    }
    let below = (det & ((1u64 << k) - 1)).count_ones();
    Some((if below.is_multiple_of(2) { 1.0 } else { -1.0 }, det | (1u64 << k)))
}

/// Applies `a†_{k0} a†_{k1} ... a_{kn}` (rightmost first).
pub fn apply(ops: &[(bool, usize)], det: u64) -> Option<(f64, u64)> {
    let mut sign = 1.0;
    let mut d = det;
    for &(dagger, k) in ops.iter().rev() {
        let (s, nd) = if dagger { create(d, k)? } else { annihilate(d, k)? };
        sign *= s;
        d = nd;
    }
    Some((sign, d))
}

/// Determinants with `n_alpha` α and `n_beta` β electrons over interleaved
/// spin orbitals `2p + σ`.
pub fn determinants(n_spatial: usize, n_alpha: usize, n_beta: usize) -> Vec<u64> {
    let strings = |n_occ: usize| -> Vec<u64> {
        (0..1u64 << n_spatial).filter(|s| s.count_ones() as usize == n_occ).collect()
    };
    let spread = |s: u64, spin: usize| -> u64 {
        (0..n_spatial).filter(|p| s >> p & 1 == 1).fold(0, |acc, p| acc | 1 << (2 * p + spin))
    };
    let mut out = Vec::new();
    for a in strings(n_alpha) {
        for b in strings(n_beta) {
            out.push(spread(a, 0) | spread(b, 1));
        }
    }
    out.sort_unstable();
    out
}

/// Hamiltonian matrix in `dets` with chemist-notation integrals.
pub fn ci_matrix(mi: &MolecularIntegrals, dets: &[u64]) -> DMatrix<f64> {
    let n = mi.n_spatial;
    let index = |d: u64| dets.binary_search(&d).ok();
    let mut h = DMatrix::zeros(dets.len(), dets.len());
    for (col, &d) in dets.iter().enumerate() {
        h[(col, col)] += mi.e_core;
        for p in 0..n {
            for q in 0..n {
                for s in 0..2 {
                    let v = mi.h1(p, q);
                    if v == 0.0 {
                        continue;
                    }
                    if let Some((sg, nd)) = apply(&[(true, 2 * p + s), (false, 2 * q + s)], d) {
                        if let Some(row) = index(nd) {
                            h[(row, col)] += v * sg;
                        }
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for t in 0..n {
                        let v = mi.eri(p, q, r, t);
                        if v == 0.0 {
                            continue;
                        }
                        for s1 in 0..2 {
                            for s2 in 0..2 {
                                let ops = [(true, 2 * p + s1), (true, 2 * r + s2), (false, 2 * t + s2), (false, 2 * q + s1)];
                                if let Some((sg, nd)) = apply(&ops, d) {
                                    if let Some(row) = index(nd) {
                                        h[(row, col)] += 0.5 * v * sg;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    h
}

/// Ascending eigenvalues of the CI matrix with the given spin populations.
pub fn ci_spectrum(mi: &MolecularIntegrals, n_alpha: usize, n_beta: usize) -> Vec<f64> {
    let dets = determinants(mi.n_spatial, n_alpha, n_beta);
    if dets.is_empty() {
        return Vec::new();
    }
    let mut e: Vec<f64> = ci_matrix(mi, &dets).symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Closed-shell ground-state energy.
pub fn ci_ground(mi: &MolecularIntegrals) -> f64 {
    let half = mi.n_electrons / 2;
    ci_spectrum(mi, half, half)[0]
}

/// Energy of the aufbau determinant.
pub fn hf_energy(mi: &MolecularIntegrals) -> f64 {
    let half = mi.n_electrons / 2;
    let hf = (0..2 * half).fold(0u64, |acc, k| acc | 1 << k);
    ci_matrix(mi, &[hf])[(0, 0)]
}
