//! Sector-resolved exact diagonalization of qubit Hamiltonians.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::chem_io::spin_of;
use crate::operator_algebra::PauliSum;

/// Largest register accepted for dense sector diagonalization.
pub const MAX_ORACLE_QUBITS: usize = 16;

/// Off-sector matrix elements above this magnitude are reported as errors.
const OFF_SECTOR_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{0}")]
    Domain(String),
    #[error("operator couples sector state {from:#b} to off-sector state {to:#b} with |element| = {magnitude:e}")]
    OffSector { from: u64, to: u64, magnitude: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorSpectrum {
    pub n_particles: usize,
    pub sz2: Option<i32>,
    pub eigenvalues: Vec<f64>,
    pub dimension: usize,
}

impl SectorSpectrum {
    pub fn ground(&self) -> f64 {
        self.eigenvalues[0]
    }
}

fn sz2_of(mask: u64) -> i32 {
    let mut s = 0;
    let mut m = mask;
    while m != 0 {
        let k = m.trailing_zeros() as usize;
        s += if spin_of(k) == 0 { 1 } else { -1 };
        m &= m - 1;
    }
    s
}

/// Basis masks with the requested Hamming weight (and twice-Sz), ascending.
pub fn sector_basis(n_qubits: usize, n_particles: usize, sz2: Option<i32>) -> Vec<u64> {
    (0..1u64 << n_qubits)
        .filter(|b| b.count_ones() as usize == n_particles && sz2.is_none_or(|s| sz2_of(*b) == s))
        .collect()
}

/// Dense Hermitian block of `h` on the sector; errors if `h` leaks out of it.
pub fn sector_matrix(h: &PauliSum, basis: &[u64], in_sector: impl Fn(u64) -> bool) -> Result<DMatrix<Complex64>, OracleError> {
    let index: HashMap<u64, usize> = basis.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let mut m = DMatrix::<Complex64>::zeros(basis.len(), basis.len());
    for (col, &c) in basis.iter().enumerate() {
        let mut image: HashMap<u64, Complex64> = HashMap::new();
        for (p, coeff) in h.iter() {
            let (ph, r) = p.apply_to_basis(c);
            *image.entry(r).or_default() += coeff * ph;
        }
        for (r, v) in image {
            match index.get(&r) {
                Some(&row) => m[(row, col)] = v,
                None if v.norm() > OFF_SECTOR_TOL && !in_sector(r) => {
                    return Err(OracleError::OffSector { from: c, to: r, magnitude: v.norm() })
                }
                None => {}
            }
        }
    }
    Ok(m)
}

/// All eigenvalues of `h` restricted to `n_particles` electrons (and twice-Sz
/// `sz2` if given), ascending.
pub fn fci_sector_spectrum(h: &PauliSum, n_particles: usize, sz2: Option<i32>) -> Result<SectorSpectrum, OracleError> {
    let n = h.n_qubits();
    if n > MAX_ORACLE_QUBITS {
        return Err(OracleError::Domain(format!("{n} qubits exceeds the dense cap of {MAX_ORACLE_QUBITS}")));
    }
    if n_particles > n {
        return Err(OracleError::Domain(format!("{n_particles} particles in {n} spin orbitals")));
    }
    let basis = sector_basis(n, n_particles, sz2);
    if basis.is_empty() {
        return Err(OracleError::Domain(format!("sector N={n_particles}, 2Sz={sz2:?} is empty")));
    }
    let m = sector_matrix(h, &basis, |_| false)?;
    let mut eigenvalues: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SectorSpectrum { n_particles, sz2, dimension: basis.len(), eigenvalues })
}

/// `E_k(target) − E_0(ground)` for every target-sector eigenvalue, ascending.
pub fn fci_energy_differences(ground: &SectorSpectrum, target: &SectorSpectrum) -> Vec<f64> {
    target.eigenvalues.iter().map(|e| e - ground.ground()).collect()
}

/// Full `2ⁿ` spectrum by dense diagonalization, for cross-checking sectors.
pub fn full_spectrum(h: &PauliSum) -> Result<Vec<f64>, OracleError> {
    let n = h.n_qubits();
    if n > 10 {
        return Err(OracleError::Domain(format!("full spectrum limited to 10 qubits, got {n}")));
    }
    let basis: Vec<u64> = (0..1u64 << n).collect();
    let m = sector_matrix(h, &basis, |_| true)?;
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}
