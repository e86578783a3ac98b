//! Dense statevector simulation.
//!
//! Basis index bit `k` set means qubit `k` is `|1⟩`, i.e. spin orbital `k` is
//! occupied; `Z_k` has eigenvalue −1 there.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use thiserror::Error;

use crate::operator_algebra::{FermionExcitation, FermionTerm, PauliSum};

/// Largest register the engine will allocate.
pub const MAX_STATEVECTOR_QUBITS: usize = 24;

/// Norm drift tolerated by unitary operations.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("{n} qubits exceeds the statevector cap of {MAX_STATEVECTOR_QUBITS}")]
    TooLarge { n: usize },
    #[error("qubit count mismatch: state has {state}, operator has {op}")]
    DimensionMismatch { state: usize, op: usize },
    #[error("{0}")]
    Domain(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Not(usize),
    H(usize),
    /// Phase gate `diag(1, i)`.
    S(usize),
    Cnot { control: usize, target: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_size(n: usize) -> Result<(), StateError> {
    if n > MAX_STATEVECTOR_QUBITS {
        Err(StateError::TooLarge { n })
    } else {
        Ok(())
    }
}

impl Statevector {
    pub fn zeros(n_qubits: usize) -> Result<Self, StateError> {
        check_size(n_qubits)?;
        Ok(Self { n_qubits, amps: vec![Complex64::default(); 1 << n_qubits] })
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self, StateError> {
        check_size(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(StateError::Domain(format!("{} amplitudes for {n_qubits} qubits", amps.len())));
        }
        Ok(Self { n_qubits, amps })
    }

    /// The computational basis state `|mask⟩`.
    pub fn basis_state(mask: u64, n_qubits: usize) -> Result<Self, StateError> {
        check_size(n_qubits)?;
        if mask >> n_qubits != 0 {
            return Err(StateError::Domain(format!("mask {mask:#b} does not fit in {n_qubits} qubits")));
        }
        let mut s = Self::zeros(n_qubits)?;
        s.amps[mask as usize] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// `(|I⟩ + phase |J⟩)/√2` for distinct basis masks.
    pub fn entangled_pair_state(
        mask_i: u64,
        mask_j: u64,
        phase: Complex64,
        n_qubits: usize,
    ) -> Result<Self, StateError> {
        Self::signed_pair_state(mask_i, 1.0, mask_j, phase, n_qubits)
    }

    /// `(s_I |I⟩ + phase s_J |J⟩)/√2`, used to carry fermionic signs.
    pub fn signed_pair_state(
        mask_i: u64,
        sign_i: f64,
        mask_j: u64,
        phase_j: Complex64,
        n_qubits: usize,
    ) -> Result<Self, StateError> {
        if mask_i == mask_j {
            return Err(StateError::Domain("entangled pair needs distinct masks".into()));
        }
        if (phase_j.norm() - 1.0).abs() > 1e-12 {
            return Err(StateError::Domain("phase must have unit modulus".into()));
        }
        let mut s = Self::basis_state(mask_i, n_qubits)?;
        if mask_j >> n_qubits != 0 {
            return Err(StateError::Domain(format!("mask {mask_j:#b} does not fit in {n_qubits} qubits")));
        }
        s.amps[mask_i as usize] = Complex64::new(sign_i * FRAC_1_SQRT_2, 0.0);
        s.amps[mask_j as usize] = phase_j * FRAC_1_SQRT_2;
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&mut self, f: Complex64) {
        for a in &mut self.amps {
            *a *= f;
        }
    }

    pub fn axpy(&mut self, alpha: Complex64, x: &Self) {
        for (a, b) in self.amps.iter_mut().zip(&x.amps) {
            *a += alpha * b;
        }
    }

    /// Largest amplitude difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Total probability on basis states with each Hamming weight.
    pub fn weight_populations(&self) -> Vec<f64> {
        let mut pops = vec![0.0; self.n_qubits + 1];
        for (b, a) in self.amps.iter().enumerate() {
            pops[b.count_ones() as usize] += a.norm_sqr();
        }
        pops
    }

    /// Returns the unique nonzero basis index and its amplitude, if the state
    /// is (up to numerical noise) a single determinant.
    pub fn single_basis_component(&self, tol: f64) -> Option<(u64, Complex64)> {
        let mut found = None;
        for (b, a) in self.amps.iter().enumerate() {
            if a.norm() > tol {
                if found.is_some() {
                    return None;
                }
                found = Some((b as u64, *a));
            }
        }
        found
    }

    pub fn apply_gate(&mut self, gate: Gate) -> Result<(), StateError> {
        let n = self.n_qubits;
        let check = |q: usize| {
            if q >= n {
                Err(StateError::Domain(format!("qubit {q} out of range for {n} qubits")))
            } else {
                Ok(())
            }
        };
        match gate {
            Gate::Not(q) => {
                check(q)?;
                let bit = 1usize << q;
                for b in 0..self.amps.len() {
                    if b & bit == 0 {
                        self.amps.swap(b, b | bit);
                    }
                }
            }
            Gate::H(q) => {
                check(q)?;
                let bit = 1usize << q;
                for b in 0..self.amps.len() {
                    if b & bit == 0 {
                        let (a0, a1) = (self.amps[b], self.amps[b | bit]);
                        self.amps[b] = (a0 + a1) * FRAC_1_SQRT_2;
                        self.amps[b | bit] = (a0 - a1) * FRAC_1_SQRT_2;
                    }
                }
            }
            Gate::S(q) => {
                check(q)?;
                let bit = 1usize << q;
                for (b, a) in self.amps.iter_mut().enumerate() {
                    if b & bit != 0 {
                        *a *= Complex64::new(0.0, 1.0);
                    }
                }
            }
            Gate::Cnot { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(StateError::Domain("CNOT control equals target".into()));
                }
                let (cb, tb) = (1usize << control, 1usize << target);
                for b in 0..self.amps.len() {
                    if b & cb != 0 && b & tb == 0 {
                        self.amps.swap(b, b | tb);
                    }
                }
            }
        }
        Ok(())
    }

    fn check_op(&self, op: &PauliSum) -> Result<(), StateError> {
        if op.n_qubits() != self.n_qubits {
            Err(StateError::DimensionMismatch { state: self.n_qubits, op: op.n_qubits() })
        } else {
            Ok(())
        }
    }

    /// `op|self⟩` for an arbitrary Pauli sum.
    pub fn apply_pauli_sum(&self, op: &PauliSum) -> Result<Self, StateError> {
        self.check_op(op)?;
        let mut out = vec![Complex64::default(); self.amps.len()];
        for (p, c) in op.iter() {
            for (b, a) in self.amps.iter().enumerate() {
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let (ph, b2) = p.apply_to_basis(b as u64);
                out[b2 as usize] += c * ph * a;
            }
        }
        Ok(Self { n_qubits: self.n_qubits, amps: out })
    }

    /// `⟨self|op|self⟩`.
    pub fn expectation(&self, op: &PauliSum) -> Result<Complex64, StateError> {
        Ok(self.inner(&self.apply_pauli_sum(op)?))
    }

    /// Expectation of a Hermitian operator; panics if the imaginary part
    /// exceeds 1e-10.
    pub fn expectation_real(&self, op: &PauliSum) -> Result<f64, StateError> {
        let e = self.expectation(op)?;
        assert!(e.im.abs() < 1e-10, "expectation of Hermitian operator has imaginary part {}", e.im);
        Ok(e.re)
    }

    /// Applies a fermionic product (non-unitary) directly on determinants.
    pub fn apply_fermion_term(&self, term: &FermionTerm) -> Self {
        let mut out = vec![Complex64::default(); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            if let Some((s, b2)) = term.apply_to_basis(b as u64) {
                out[b2 as usize] += term.coeff * s * a;
            }
        }
        Self { n_qubits: self.n_qubits, amps: out }
    }

    /// `exp(θ g)|self⟩` for an anti-Hermitian Pauli sum `g`.
    ///
    /// Uses a truncated Taylor series over sub-steps with `‖θ g‖₁ ≤ ½`, summed
    /// until terms fall below 1e-17 relative to the state norm.
    pub fn apply_exp_generator(&mut self, g: &PauliSum, theta: f64) -> Result<(), StateError> {
        self.check_op(g)?;
        if g.hermitian_conjugate().max_abs_diff(&-g) > 1e-10 {
            return Err(StateError::Domain("generator is not anti-Hermitian".into()));
        }
        let bound = g.one_norm() * theta.abs();
        if bound == 0.0 {
            return Ok(());
        }
        let steps = (2.0 * bound).ceil().max(1.0) as usize;
        let dt = theta / steps as f64;
        for _ in 0..steps {
            let mut term = self.clone();
            let mut acc = self.clone();
            for k in 1..64 {
                term = term.apply_pauli_sum(g)?;
                term.scale(Complex64::new(dt / k as f64, 0.0));
                acc.axpy(Complex64::new(1.0, 0.0), &term);
                if term.norm() < 1e-17 {
                    break;
                }
            }
            *self = acc;
        }
        Ok(())
    }

    /// `exp(θ (T − T†))|self⟩` for a fermionic product `T`.
    ///
    /// `T` maps each determinant to at most one determinant with a ±1 sign and
    /// `T² = 0`, so the exponential is a set of independent plane rotations.
    pub fn apply_excitation_rotation(&mut self, ex: &FermionExcitation, theta: f64) {
        let term = ex.term();
        let (c, s) = (theta.cos(), theta.sin());
        for b in 0..self.amps.len() {
            if let Some((sign, b2)) = term.apply_to_basis(b as u64) {
                if b2 as usize == b {
                    continue;
                }
                let (x, y) = (self.amps[b], self.amps[b2 as usize]);
                self.amps[b] = x * c - y * (sign * s);
                self.amps[b2 as usize] = y * c + x * (sign * s);
            }
        }
    }

    /// `(T − T†)|self⟩`.
    pub fn apply_excitation_generator(&self, ex: &FermionExcitation) -> Self {
        let term = ex.term();
        let mut out = vec![Complex64::default(); self.amps.len()];
        for b in 0..self.amps.len() {
            if let Some((sign, b2)) = term.apply_to_basis(b as u64) {
                if b2 as usize == b {
                    continue;
                }
                // T|b⟩ = sign|b2⟩ and T†|b2⟩ = sign|b⟩.
                out[b2 as usize] += self.amps[b] * sign;
                out[b] -= self.amps[b2 as usize] * sign;
            }
        }
        Self { n_qubits: self.n_qubits, amps: out }
    }
}

/// Gate sequence preparing `(|I⟩ + |J⟩)/√2` from `|0…0⟩` with NOT, one
/// Hadamard and `popcount(I ⊕ J) − 1` CNOTs. Relative fermionic signs are not
/// reproduced.
pub fn entangled_pair_circuit(mask_i: u64, mask_j: u64) -> Result<Vec<Gate>, StateError> {
    let diff = mask_i ^ mask_j;
    if diff == 0 {
        return Err(StateError::Domain("entangled pair needs distinct masks".into()));
    }
    let pivot = diff.trailing_zeros() as usize;
    // The branch with the pivot bit clear is prepared classically.
    let base = if mask_i >> pivot & 1 == 0 { mask_i } else { mask_j };
    let mut gates = Vec::new();
    for q in 0..64 {
        if base >> q & 1 == 1 {
            gates.push(Gate::Not(q));
        }
    }
    gates.push(Gate::H(pivot));
    for q in 0..64 {
        if q != pivot && diff >> q & 1 == 1 {
            gates.push(Gate::Cnot { control: pivot, target: q });
        }
    }
    Ok(gates)
}

pub fn cnot_count(gates: &[Gate]) -> usize {
    gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count()
}

/// A Pauli sum compiled to a sparse row-major matrix for repeated application.
#[derive(Clone, Debug)]
pub struct CompiledOperator {
    n_qubits: usize,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
}

impl CompiledOperator {
    pub fn new(op: &PauliSum) -> Result<Self, StateError> {
        let n = op.n_qubits();
        check_size(n)?;
        let dim = 1usize << n;
        // Group terms sharing an X mask: they connect the same pair of states.
        let mut groups: std::collections::BTreeMap<u64, Vec<(u64, u32, Complex64)>> = Default::default();
        for (p, c) in op.iter() {
            groups.entry(p.x_mask()).or_default().push((p.z_mask(), p.y_count(), *c));
        }
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        // Row r of the matrix: (op ψ)[r] = Σ_x Σ_terms c i^y (-1)^{z·(r^x)} ψ[r^x].
        for r in 0..dim as u64 {
            for (&x, terms) in &groups {
                let col = r ^ x;
                let mut v = Complex64::default();
                for &(z, y, c) in terms {
                    let neg = (z & col).count_ones() % 2 == 1;
                    let ph = crate::operator_algebra::i_pow(y as i64 + if neg { 2 } else { 0 });
                    v += c * ph;
                }
                if v.norm() > 1e-15 {
                    cols.push(col as u32);
                    vals.push(v);
                }
            }
            row_start.push(cols.len());
        }
        Ok(Self { n_qubits: n, row_start, cols, vals })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn apply(&self, psi: &Statevector) -> Result<Statevector, StateError> {
        if psi.n_qubits != self.n_qubits {
            return Err(StateError::DimensionMismatch { state: psi.n_qubits, op: self.n_qubits });
        }
        let amps = (0..psi.amps.len())
            .map(|r| {
                let mut acc = Complex64::default();
                for k in self.row_start[r]..self.row_start[r + 1] {
                    acc += self.vals[k] * psi.amps[self.cols[k] as usize];
                }
                acc
            })
            .collect();
        Ok(Statevector { n_qubits: self.n_qubits, amps })
    }

    pub fn expectation(&self, psi: &Statevector) -> Result<Complex64, StateError> {
        Ok(psi.inner(&self.apply(psi)?))
    }

    /// Matrix element `⟨r|op|c⟩`.
    pub fn element(&self, r: u64, c: u64) -> Complex64 {
        let r = r as usize;
        (self.row_start[r]..self.row_start[r + 1])
            .find(|&k| self.cols[k] as u64 == c)
            .map(|k| self.vals[k])
            .unwrap_or_default()
    }
}
