//! Molecular integrals: FCIDUMP parsing and serialization, frozen-core folding,
//! direct sums of non-interacting fragments, and expansion to antisymmetrized
//! spin-orbital coefficients.
//!
//! Spatial integrals are real and use chemists' notation `(pq|rs)`. Spin
//! orbitals are interleaved: spin orbital `k = 2p + s` with `s = 0` for alpha
//! and `s = 1` for beta.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Symmetry tolerance used by [`MolecularIntegrals::check_symmetry`].
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Largest tolerated disagreement between two records of the same integral.
pub const DUPLICATE_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum ChemIoError {
    #[error("malformed FCIDUMP header: {key}: {reason}")]
    Header { key: String, reason: String },
    #[error("line {line}: {reason}")]
    Record { line: usize, reason: String },
    #[error("line {line}: orbital index {index} exceeds NORB={norb}")]
    Bounds { line: usize, index: usize, norb: usize },
    #[error("line {line}: integral {indices:?} recorded as {first} and {second}")]
    Consistency {
        line: usize,
        indices: [usize; 4],
        first: f64,
        second: f64,
    },
    #[error("{0}")]
    Domain(String),
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest: {0}")]
    Manifest(String),
}

/// Spatial-orbital one- and two-electron integrals plus the scalar core energy.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularIntegrals {
    pub n_spatial: usize,
    pub n_electrons: usize,
    pub ms2: i32,
    pub e_core: f64,
    h1: Vec<f64>,
    eri: Vec<f64>,
}

impl MolecularIntegrals {
    /// All-zero integrals.
    pub fn zeros(n_spatial: usize, n_electrons: usize, ms2: i32) -> Self {
        Self {
            n_spatial,
            n_electrons,
            ms2,
            e_core: 0.0,
            h1: vec![0.0; n_spatial * n_spatial],
            eri: vec![0.0; n_spatial.pow(4)],
        }
    }

    #[inline]
    fn idx2(&self, p: usize, q: usize) -> usize {
        p * self.n_spatial + q
    }

    #[inline]
    fn idx4(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let n = self.n_spatial;
        ((p * n + q) * n + r) * n + s
    }

    #[inline]
    pub fn h1(&self, p: usize, q: usize) -> f64 {
        self.h1[self.idx2(p, q)]
    }

    /// Two-electron integral `(pq|rs)`.
    #[inline]
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.eri[self.idx4(p, q, r, s)]
    }

    /// Sets `h[p][q]` and `h[q][p]`.
    pub fn set_h1(&mut self, p: usize, q: usize, value: f64) {
        let (a, b) = (self.idx2(p, q), self.idx2(q, p));
        self.h1[a] = value;
        self.h1[b] = value;
    }

    /// Sets `(pq|rs)` together with its seven permutational partners.
    pub fn set_eri(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for [a, b, c, d] in eri_partners(p, q, r, s) {
            let k = self.idx4(a, b, c, d);
            self.eri[k] = value;
        }
    }

    /// Checks hermiticity of `h1` and the 8-fold symmetry of `eri`.
    pub fn check_symmetry(&self, tol: f64) -> Result<(), ChemIoError> {
        let n = self.n_spatial;
        for p in 0..n {
            for q in 0..n {
                if (self.h1(p, q) - self.h1(q, p)).abs() > tol {
                    return Err(ChemIoError::Domain(format!("h1 not symmetric at ({p},{q})")));
                }
                for r in 0..n {
                    for s in 0..n {
                        let v = self.eri(p, q, r, s);
                        for [a, b, c, d] in eri_partners(p, q, r, s) {
                            if (self.eri(a, b, c, d) - v).abs() > tol {
                                return Err(ChemIoError::Domain(format!(
                                    "eri symmetry broken at ({p}{q}|{r}{s})"
                                )));
                            }
                        }
                    }
                }
            }
        }
        if self.n_electrons == 0 || self.n_electrons > 2 * n {
            return Err(ChemIoError::Domain(format!(
                "electron count {} outside (0, {}]",
                self.n_electrons,
                2 * n
            )));
        }
        Ok(())
    }
}

fn eri_partners(p: usize, q: usize, r: usize, s: usize) -> [[usize; 4]; 8] {
    [
        [p, q, r, s],
        [q, p, r, s],
        [p, q, s, r],
        [q, p, s, r],
        [r, s, p, q],
        [s, r, p, q],
        [r, s, q, p],
        [s, r, q, p],
    ]
}

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i32,
}

fn parse_header(text: &str) -> Result<Header, ChemIoError> {
    let mut fields: HashMap<String, String> = HashMap::new();
    // Namelist: KEY=value[,value...], separated by commas; values of array keys
    // (ORBSYM) continue until the next KEY= token.
    let cleaned = text.replace(['\n', '\r'], " ");
    let mut current: Option<String> = None;
    for raw in cleaned.split(',') {
        let tok = raw.trim();
        if tok.is_empty() {
            continue;
        }
        if let Some((k, v)) = tok.split_once('=') {
            let key = k.trim().to_ascii_uppercase();
            fields.insert(key.clone(), v.trim().to_string());
            current = Some(key);
        } else if let Some(key) = &current {
            let entry = fields.get_mut(key).expect("current key present");
            entry.push(',');
            entry.push_str(tok);
        }
    }
    let get = |key: &str| -> Result<&String, ChemIoError> {
        fields.get(key).ok_or_else(|| ChemIoError::Header {
            key: key.into(),
            reason: "missing".into(),
        })
    };
    let parse_int = |key: &str, v: &str| -> Result<i64, ChemIoError> {
        v.trim().parse::<i64>().map_err(|_| ChemIoError::Header {
            key: key.into(),
            reason: format!("expected an integer, got {v:?}"),
        })
    };
    let norb = parse_int("NORB", get("NORB")?)?;
    let nelec = parse_int("NELEC", get("NELEC")?)?;
    let ms2 = match fields.get("MS2") {
        Some(v) => parse_int("MS2", v)?,
        None => 0,
    };
    if norb <= 0 {
        return Err(ChemIoError::Header {
            key: "NORB".into(),
            reason: format!("must be positive, got {norb}"),
        });
    }
    if nelec <= 0 || nelec > 2 * norb {
        return Err(ChemIoError::Header {
            key: "NELEC".into(),
            reason: format!("must lie in (0, 2*NORB], got {nelec}"),
        });
    }
    if let Some(v) = fields.get("IUHF") {
        if parse_int("IUHF", v)? != 0 {
            return Err(ChemIoError::Header {
                key: "IUHF".into(),
                reason: "unrestricted integrals are not supported".into(),
            });
        }
    }
    Ok(Header {
        norb: norb as usize,
        nelec: nelec as usize,
        ms2: ms2 as i32,
    })
}

/// Parses FCIDUMP text into spatial-orbital integrals.
///
/// Only real-valued records are accepted. Each stored record populates all
/// symmetry-equivalent entries; duplicate records must agree within
/// [`DUPLICATE_TOL`].
pub fn parse_fcidump(text: &str) -> Result<MolecularIntegrals, ChemIoError> {
    let upper = text.to_ascii_uppercase();
    let start = upper.find("&FCI").ok_or_else(|| ChemIoError::Header {
        key: "&FCI".into(),
        reason: "namelist start not found".into(),
    })?;
    let rest = &upper[start + 4..];
    let (end_rel, end_len) = match (rest.find("&END"), rest.find('/')) {
        (Some(a), Some(b)) if b < a => (b, 1),
        (Some(a), _) => (a, 4),
        (None, Some(b)) => (b, 1),
        (None, None) => {
            return Err(ChemIoError::Header {
                key: "&END".into(),
                reason: "namelist terminator not found".into(),
            })
        }
    };
    let header = parse_header(&rest[..end_rel])?;
    let body_offset = start + 4 + end_rel + end_len;
    let line_offset = text[..body_offset].lines().count();

    let mut mi = MolecularIntegrals::zeros(header.norb, header.nelec, header.ms2);
    let mut seen_h1: HashMap<(usize, usize), f64> = HashMap::new();
    let mut seen_eri: HashMap<[usize; 4], f64> = HashMap::new();
    let mut seen_core: Option<f64> = None;

    // The remainder of the terminator line may be empty.
    for (k, line) in text[body_offset..].lines().enumerate() {
        let lineno = line_offset + k;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks[0].starts_with('(') {
            return Err(ChemIoError::Record {
                line: lineno,
                reason: "complex-valued integrals are not supported".into(),
            });
        }
        if toks.len() != 5 {
            return Err(ChemIoError::Record {
                line: lineno,
                reason: format!("expected `value i j k l`, found {} fields", toks.len()),
            });
        }
        let value: f64 = toks[0]
            .replace(['D', 'd'], "e")
            .parse()
            .map_err(|_| ChemIoError::Record {
                line: lineno,
                reason: format!("bad value {:?}", toks[0]),
            })?;
        let mut idx = [0usize; 4];
        for (slot, t) in idx.iter_mut().zip(&toks[1..]) {
            *slot = t.parse().map_err(|_| ChemIoError::Record {
                line: lineno,
                reason: format!("bad index {t:?}"),
            })?;
            if *slot > header.norb {
                return Err(ChemIoError::Bounds {
                    line: lineno,
                    index: *slot,
                    norb: header.norb,
                });
            }
        }
        let [i, j, k2, l] = idx;
        let conflict = |first: f64| ChemIoError::Consistency {
            line: lineno,
            indices: idx,
            first,
            second: value,
        };
        match (i, j, k2, l) {
            (0, 0, 0, 0) => {
                if let Some(prev) = seen_core {
                    if (prev - value).abs() > DUPLICATE_TOL {
                        return Err(conflict(prev));
                    }
                }
                seen_core = Some(value);
                mi.e_core = value;
            }
            (i, j, 0, 0) if i > 0 && j > 0 => {
                let key = (i.min(j) - 1, i.max(j) - 1);
                if let Some(prev) = seen_h1.insert(key, value) {
                    if (prev - value).abs() > DUPLICATE_TOL {
                        return Err(conflict(prev));
                    }
                }
                mi.set_h1(i - 1, j - 1, value);
            }
            (i, j, k2, l) if i > 0 && j > 0 && k2 > 0 && l > 0 => {
                let key = canonical_eri([i - 1, j - 1, k2 - 1, l - 1]);
                if let Some(prev) = seen_eri.insert(key, value) {
                    if (prev - value).abs() > DUPLICATE_TOL {
                        return Err(conflict(prev));
                    }
                }
                mi.set_eri(i - 1, j - 1, k2 - 1, l - 1, value);
            }
            _ => {
                // Orbital-energy records (i 0 0 0) carry no Hamiltonian data.
                if !(i > 0 && j == 0 && k2 == 0 && l == 0) {
                    return Err(ChemIoError::Record {
                        line: lineno,
                        reason: format!("unrecognized index pattern {idx:?}"),
                    });
                }
            }
        }
    }
    Ok(mi)
}

fn canonical_eri(idx: [usize; 4]) -> [usize; 4] {
    let [p, q, r, s] = idx;
    let a = (p.max(q), p.min(q));
    let b = (r.max(s), r.min(s));
    let (x, y) = if a >= b { (a, b) } else { (b, a) };
    [x.0, x.1, y.0, y.1]
}

pub fn read_fcidump(path: impl AsRef<Path>) -> Result<MolecularIntegrals, ChemIoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ChemIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_fcidump(&text)
}

/// Serializes to FCIDUMP text, writing one record per canonical index tuple.
pub fn write_fcidump(mi: &MolecularIntegrals) -> String {
    let n = mi.n_spatial;
    let mut out = String::new();
    let _ = writeln!(
        out,
        " &FCI NORB={},NELEC={},MS2={},\n  ORBSYM={}\n  ISYM=1,\n &END",
        n,
        mi.n_electrons,
        mi.ms2,
        "1,".repeat(n)
    );
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if p * (p + 1) / 2 + q < r * (r + 1) / 2 + s {
                        continue;
                    }
                    let v = mi.eri(p, q, r, s);
                    if v != 0.0 {
                        let _ = writeln!(out, "{:.17e} {} {} {} {}", v, p + 1, q + 1, r + 1, s + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = mi.h1(p, q);
            if v != 0.0 {
                let _ = writeln!(out, "{:.17e} {} {} 0 0", v, p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{:.17e} 0 0 0 0", mi.e_core);
    out
}

/// Folds the lowest `n_frozen` spatial orbitals, held doubly occupied, into
/// an effective one-electron operator and the scalar core energy.
pub fn freeze_core(mi: &MolecularIntegrals, n_frozen: usize) -> Result<MolecularIntegrals, ChemIoError> {
    if 2 * n_frozen > mi.n_electrons {
        return Err(ChemIoError::Domain(format!(
            "cannot freeze {n_frozen} orbitals with {} electrons",
            mi.n_electrons
        )));
    }
    if n_frozen == 0 {
        return Ok(mi.clone());
    }
    if n_frozen >= mi.n_spatial {
        return Err(ChemIoError::Domain(format!(
            "cannot freeze {n_frozen} of {} orbitals",
            mi.n_spatial
        )));
    }
    let core = 0..n_frozen;
    let n_act = mi.n_spatial - n_frozen;
    let mut out = MolecularIntegrals::zeros(n_act, mi.n_electrons - 2 * n_frozen, mi.ms2);

    let mut e_core = mi.e_core;
    for i in core.clone() {
        e_core += 2.0 * mi.h1(i, i);
        for j in core.clone() {
            e_core += 2.0 * mi.eri(i, i, j, j) - mi.eri(i, j, j, i);
        }
    }
    out.e_core = e_core;

    for p in 0..n_act {
        for q in 0..n_act {
            let (pp, qq) = (p + n_frozen, q + n_frozen);
            let mut v = mi.h1(pp, qq);
            for i in core.clone() {
                v += 2.0 * mi.eri(pp, qq, i, i) - mi.eri(pp, i, i, qq);
            }
            let k = out.idx2(p, q);
            out.h1[k] = v;
            for r in 0..n_act {
                for s in 0..n_act {
                    let k = out.idx4(p, q, r, s);
                    out.eri[k] = mi.eri(pp, qq, r + n_frozen, s + n_frozen);
                }
            }
        }
    }
    Ok(out)
}

/// Integrals of two non-interacting closed-shell fragments.
///
/// Orbitals are reordered so every fragment's doubly occupied orbitals come
/// first (fragment `a` then fragment `b`), followed by the virtual orbitals in
/// the same fragment order. All cross-fragment integrals are zero and the core
/// energies add.
pub fn direct_sum(a: &MolecularIntegrals, b: &MolecularIntegrals) -> Result<MolecularIntegrals, ChemIoError> {
    for (name, f) in [("first", a), ("second", b)] {
        if f.n_electrons % 2 != 0 || f.ms2 != 0 {
            return Err(ChemIoError::Domain(format!("{name} fragment is not closed-shell")));
        }
    }
    let (occ_a, occ_b) = (a.n_electrons / 2, b.n_electrons / 2);
    let n = a.n_spatial + b.n_spatial;
    // Position of each fragment orbital in the composite ordering.
    let map_a: Vec<usize> = (0..a.n_spatial)
        .map(|p| if p < occ_a { p } else { occ_a + occ_b + (p - occ_a) })
        .collect();
    let map_b: Vec<usize> = (0..b.n_spatial)
        .map(|p| {
            if p < occ_b {
                occ_a + p
            } else {
                occ_a + occ_b + (a.n_spatial - occ_a) + (p - occ_b)
            }
        })
        .collect();
    let mut out = MolecularIntegrals::zeros(n, a.n_electrons + b.n_electrons, 0);
    out.e_core = a.e_core + b.e_core;
    for (frag, map) in [(a, &map_a), (b, &map_b)] {
        let m = frag.n_spatial;
        for p in 0..m {
            for q in 0..m {
                let k = out.idx2(map[p], map[q]);
                out.h1[k] = frag.h1(p, q);
                for r in 0..m {
                    for s in 0..m {
                        let k = out.idx4(map[p], map[q], map[r], map[s]);
                        out.eri[k] = frag.eri(p, q, r, s);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// One-electron coefficients and antisymmetrized two-electron coefficients
/// `<pq||rs>` over interleaved spin orbitals.
#[derive(Clone, Debug)]
pub struct SpinOrbitalHamiltonianCoefficients {
    pub n_so: usize,
    pub e_core: f64,
    h_so: Vec<f64>,
    v_asym: Vec<f64>,
}

impl SpinOrbitalHamiltonianCoefficients {
    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.h_so[p * self.n_so + q]
    }

    /// `<pq||rs> = <pq|rs> - <pq|sr>`.
    #[inline]
    pub fn v(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_so;
        self.v_asym[((p * n + q) * n + r) * n + s]
    }
}

#[inline]
pub fn spatial_of(k: usize) -> usize {
    k / 2
}

/// 0 for alpha, 1 for beta.
#[inline]
pub fn spin_of(k: usize) -> usize {
    k % 2
}

pub fn to_spin_orbitals(mi: &MolecularIntegrals) -> SpinOrbitalHamiltonianCoefficients {
    let n_so = 2 * mi.n_spatial;
    let mut h_so = vec![0.0; n_so * n_so];
    for p in 0..n_so {
        for q in 0..n_so {
            if spin_of(p) == spin_of(q) {
                h_so[p * n_so + q] = mi.h1(spatial_of(p), spatial_of(q));
            }
        }
    }
    // <pq|rs> = (pr|qs) when spin(p)=spin(r) and spin(q)=spin(s).
    let phys = |p: usize, q: usize, r: usize, s: usize| -> f64 {
        if spin_of(p) == spin_of(r) && spin_of(q) == spin_of(s) {
            mi.eri(spatial_of(p), spatial_of(r), spatial_of(q), spatial_of(s))
        } else {
            0.0
        }
    };
    let mut v_asym = vec![0.0; n_so.pow(4)];
    for p in 0..n_so {
        for q in 0..n_so {
            for r in 0..n_so {
                for s in 0..n_so {
                    v_asym[((p * n_so + q) * n_so + r) * n_so + s] = phys(p, q, r, s) - phys(p, q, s, r);
                }
            }
        }
    }
    SpinOrbitalHamiltonianCoefficients {
        n_so,
        e_core: mi.e_core,
        h_so,
        v_asym,
    }
}

/// One fixture record of `fixtures/manifest.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub molecule: String,
    pub tag: String,
    pub path: String,
    pub geometry: Vec<Atom>,
    pub basis: String,
    pub n_frozen: usize,
    pub scf_energy: f64,
    #[serde(default)]
    pub fci_energy: Option<f64>,
    #[serde(default)]
    pub frozen_core_fci_energy: Option<f64>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Atom {
    pub element: String,
    pub xyz: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixtureManifest {
    pub generator: String,
    pub basis: String,
    #[serde(default)]
    pub units: Option<String>,
    pub fixtures: Vec<FixtureEntry>,
}

impl FixtureManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ChemIoError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ChemIoError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| ChemIoError::Manifest(e.to_string()))
    }

    pub fn find(&self, molecule: &str, tag: &str) -> Option<&FixtureEntry> {
        self.fixtures
            .iter()
            .find(|f| f.molecule == molecule && f.tag == tag)
    }

    pub fn molecule(&self, molecule: &str) -> Vec<&FixtureEntry> {
        self.fixtures.iter().filter(|f| f.molecule == molecule).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_ORBITAL: &str = " &FCI NORB=1,NELEC=2,MS2=0,\n  ORBSYM=1,\n  ISYM=1,\n &END\n\
        0.7137 1 1 1 1\n-1.2528 1 1 0 0\n0.7137 0 0 0 0\n";

    #[test]
    fn parses_single_orbital_records() {
        let mi = parse_fcidump(ONE_ORBITAL).unwrap();
        assert_eq!(mi.n_spatial, 1);
        assert_eq!(mi.n_electrons, 2);
        assert_eq!(mi.eri(0, 0, 0, 0), 0.7137);
        assert_eq!(mi.h1(0, 0), -1.2528);
        assert_eq!(mi.e_core, 0.7137);
    }

    #[test]
    fn empty_body_gives_zero_tensors() {
        let mi = parse_fcidump("&FCI NORB=2,NELEC=2,MS2=0,\n&END\n").unwrap();
        assert_eq!(mi.e_core, 0.0);
        assert!(mi.h1.iter().chain(mi.eri.iter()).all(|&v| v == 0.0));
    }

    #[test]
    fn populates_symmetry_partners() {
        let text = "&FCI NORB=2,NELEC=2,\n/\n0.25 2 1 1 1\n";
        let mi = parse_fcidump(text).unwrap();
        for idx in [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]] {
            assert_eq!(mi.eri(idx[0], idx[1], idx[2], idx[3]), 0.25);
        }
        assert_eq!(mi.eri(1, 1, 0, 0), 0.0);
    }

    #[test]
    fn header_errors_name_the_key() {
        let err = parse_fcidump("&FCI NELEC=2,\n&END\n").unwrap_err();
        assert!(err.to_string().contains("NORB"), "{err}");
        let err = parse_fcidump("&FCI NORB=x,NELEC=2,\n&END\n").unwrap_err();
        assert!(err.to_string().contains("NORB"), "{err}");
        let err = parse_fcidump("&FCI NORB=1,NELEC=5,\n&END\n").unwrap_err();
        assert!(err.to_string().contains("NELEC"), "{err}");
    }

    #[test]
    fn index_out_of_range_is_a_bounds_error() {
        let err = parse_fcidump("&FCI NORB=1,NELEC=2,\n&END\n0.1 2 1 0 0\n").unwrap_err();
        assert!(matches!(err, ChemIoError::Bounds { index: 2, norb: 1, .. }), "{err}");
    }

    #[test]
    fn conflicting_duplicates_are_rejected() {
        let ok = "&FCI NORB=2,NELEC=2,\n&END\n0.5 1 1 2 2\n0.500000000001 2 2 1 1\n";
        assert!(parse_fcidump(ok).is_ok());
        let bad = "&FCI NORB=2,NELEC=2,\n&END\n0.5 1 1 2 2\n0.6 2 2 1 1\n";
        assert!(matches!(parse_fcidump(bad), Err(ChemIoError::Consistency { .. })));
    }

    #[test]
    fn complex_records_are_rejected() {
        let text = "&FCI NORB=1,NELEC=2,\n&END\n(0.1,0.2) 1 1 1 1\n";
        assert!(matches!(parse_fcidump(text), Err(ChemIoError::Record { .. })));
    }

    #[test]
    fn freeze_zero_is_identity() {
        let mi = parse_fcidump(ONE_ORBITAL).unwrap();
        assert_eq!(freeze_core(&mi, 0).unwrap(), mi);
    }

    #[test]
    fn freeze_too_many_is_a_domain_error() {
        let mi = parse_fcidump(ONE_ORBITAL).unwrap();
        assert!(matches!(freeze_core(&mi, 2), Err(ChemIoError::Domain(_))));
    }

    #[test]
    fn single_orbital_spin_expansion() {
        let mi = parse_fcidump(ONE_ORBITAL).unwrap();
        let so = to_spin_orbitals(&mi);
        assert_eq!(so.n_so, 2);
        assert_eq!(so.v(0, 1, 0, 1), 0.7137);
        assert_eq!(so.v(1, 0, 0, 1), -0.7137);
        assert_eq!(so.v(0, 0, 0, 0), 0.0);
        assert_eq!(so.h(0, 1), 0.0);
        assert_eq!(so.h(1, 1), -1.2528);
    }

    #[test]
    fn direct_sum_puts_occupied_orbitals_first() {
        let a = parse_fcidump(ONE_ORBITAL).unwrap();
        let mut b = MolecularIntegrals::zeros(2, 2, 0);
        b.set_h1(0, 0, -1.0);
        b.set_h1(1, 1, 0.5);
        b.set_eri(0, 0, 1, 1, 0.3);
        b.e_core = 1.0;
        let c = direct_sum(&a, &b).unwrap();
        assert_eq!(c.n_spatial, 3);
        assert_eq!(c.n_electrons, 4);
        assert_eq!(c.h1(0, 0), -1.2528);
        assert_eq!(c.h1(1, 1), -1.0);
        assert_eq!(c.h1(2, 2), 0.5);
        assert_eq!(c.eri(1, 1, 2, 2), 0.3);
        assert_eq!(c.eri(0, 0, 1, 1), 0.0);
        assert!((c.e_core - 1.7137).abs() < 1e-15);
        c.check_symmetry(SYMMETRY_TOL).unwrap();
    }
}
