//! q-sc-EOM, qEOM and QSE matrix builders and solvers.

use std::fmt;
use std::fmt::Write as _;

use log::debug;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::ground_state::GroundStateResult;
use crate::linalg::{canonical_orthogonalizer, general_eig, hermitian_eigh, hermiticity_error, CMatrix, CVector};
use crate::manifolds::{Manifold, Sector};
use crate::operator_algebra::{AlgebraError, FermionTerm};
use crate::statevector::{entangled_pair_circuit, CompiledOperator, Gate, StateError, Statevector};

/// Hermiticity tolerance on assembled q-sc-EOM matrices.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Default overlap eigenvalue cutoff for generalized solves.
pub const CANONICAL_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum EomError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("manifold entry {entry} does not map the reference to a signed determinant (|amplitude| = {norm})")]
    SignTracking { entry: usize, norm: f64 },
    #[error("ground-state reference is not the manifold reference determinant {expected:#b}")]
    ReferenceMismatch { expected: u64 },
    #[error("matrix is not Hermitian: max |M − M†| = {0:e}")]
    NonHermitian(f64),
    #[error("{0} solver called on a {1} matrix set")]
    WrongMethod(&'static str, Method),
    #[error("overlap matrix has no eigenvalue above {0:e}")]
    EmptySubspace(f64),
    #[error("matrix dump: {0}")]
    Dump(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Method {
    #[serde(rename = "QSCEOM")]
    QscEom,
    #[serde(rename = "QEOM")]
    Qeom,
    #[serde(rename = "QSE")]
    Qse,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::QscEom => "QSCEOM",
            Method::Qeom => "QEOM",
            Method::Qse => "QSE",
        })
    }
}

/// Matrices for one method and sector. Which blocks are present depends on
/// the method: `m` for q-sc-EOM; `m`, `q`, `v`, `w` for qEOM; `h_sub`,
/// `s_sub` for QSE.
#[derive(Clone, Debug)]
pub struct EomMatrixSet {
    pub method: Method,
    pub sector: Sector,
    pub m: Option<CMatrix>,
    pub q: Option<CMatrix>,
    pub v: Option<CMatrix>,
    pub w: Option<CMatrix>,
    pub h_sub: Option<CMatrix>,
    pub s_sub: Option<CMatrix>,
    pub e_gr: f64,
    /// QSE only: whether the first subspace vector is the ground state itself.
    pub includes_identity: bool,
}

impl EomMatrixSet {
    fn new(method: Method, sector: Sector, e_gr: f64) -> Self {
        Self { method, sector, m: None, q: None, v: None, w: None, h_sub: None, s_sub: None, e_gr, includes_identity: false }
    }
}

#[derive(Clone, Debug)]
pub struct Root {
    pub delta_e: f64,
    /// Imaginary part of the eigenvalue (zero for Hermitian solves).
    pub imag: f64,
    pub amplitudes: CVector,
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub max_imag: f64,
    pub max_residual: f64,
    /// Directions dropped by the metric or overlap cutoff.
    pub discarded_directions: usize,
    /// QSE with the identity operator: lowest subspace root, taken as the
    /// ground state and removed from `roots`.
    pub subspace_ground: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub method: Method,
    pub sector: Sector,
    pub roots: Vec<Root>,
    pub diagnostics: Diagnostics,
}

impl SpectrumResult {
    pub fn delta_energies(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.delta_e).collect()
    }
}

/// `Ĝ_I|Φ₀⟩ = sign |mask⟩` for a manifold entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExcitedDeterminant {
    pub mask: u64,
    pub sign: f64,
}

impl ExcitedDeterminant {
    pub fn state(&self, n_qubits: usize) -> Result<Statevector, StateError> {
        let mut s = Statevector::basis_state(self.mask, n_qubits)?;
        s.scale(Complex64::new(self.sign, 0.0));
        Ok(s)
    }
}

fn check_reference(gs: &GroundStateResult, m: &Manifold) -> Result<(), EomError> {
    let expected = m.reference_mask();
    match gs.reference.single_basis_component(1e-14) {
        Some((mask, a)) if mask == expected && (a - Complex64::new(1.0, 0.0)).norm() < 1e-14 => Ok(()),
        _ => Err(EomError::ReferenceMismatch { expected }),
    }
}

/// Applies the Jordan–Wigner image of every `Ĝ_I` to the reference and reads
/// off the resulting determinant and its sign.
pub fn excited_determinants(m: &Manifold, n_qubits: usize) -> Result<Vec<ExcitedDeterminant>, EomError> {
    let phi0 = Statevector::basis_state(m.reference_mask(), n_qubits)?;
    m.entries
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let op = e.excitation().operator(n_qubits)?;
            let out = phi0.apply_pauli_sum(&op)?;
            match out.single_basis_component(1e-12) {
                Some((mask, a)) if (a.norm() - 1.0).abs() < 1e-12 && a.im.abs() < 1e-12 => {
                    Ok(ExcitedDeterminant { mask, sign: a.re.signum() })
                }
                other => Err(EomError::SignTracking { entry: k, norm: other.map_or(out.norm(), |(_, a)| a.norm()) }),
            }
        })
        .collect()
}

/// Largest `‖Ĝ_I†|Φ₀⟩‖` over the manifold, by Jordan–Wigner application.
pub fn vacuum_annihilation_residual(m: &Manifold, n_qubits: usize) -> Result<f64, EomError> {
    let phi0 = Statevector::basis_state(m.reference_mask(), n_qubits)?;
    let mut worst: f64 = 0.0;
    for e in &m.entries {
        let op = e.excitation().operator(n_qubits)?.hermitian_conjugate();
        worst = worst.max(phi0.apply_pauli_sum(&op)?.norm());
    }
    Ok(worst)
}

/// `V_IJ = ⟨Φ₀|[Ĝ_I†, Ĝ_J]|Φ₀⟩` evaluated directly.
pub fn metric_on_reference(m: &Manifold, n_qubits: usize) -> Result<CMatrix, EomError> {
    let phi0 = Statevector::basis_state(m.reference_mask(), n_qubits)?;
    let ops = m
        .entries
        .iter()
        .map(|e| e.excitation().operator(n_qubits))
        .collect::<Result<Vec<_>, _>>()?;
    let n = ops.len();
    let mut v = CMatrix::zeros(n, n);
    for i in 0..n {
        let gi_dag = ops[i].hermitian_conjugate();
        for j in 0..n {
            let comm = gi_dag.commutator(&ops[j])?;
            v[(i, j)] = phi0.expectation(&comm)?;
        }
    }
    Ok(v)
}

fn dressed_states(gs: &GroundStateResult, dets: &[ExcitedDeterminant]) -> Result<Vec<Statevector>, EomError> {
    let n = gs.reference.n_qubits();
    dets.par_iter()
        .map(|d| {
            let mut s = d.state(n)?;
            gs.ansatz.apply(&mut s)?;
            Ok(s)
        })
        .collect()
}

/// `M_IJ = ⟨Φ_I|U†HU|Φ_J⟩ − δ_IJ E_gr` with `|Φ_J⟩ = Ĝ_J|Φ₀⟩`.
pub fn build_m_direct(gs: &GroundStateResult, h: &CompiledOperator, m: &Manifold) -> Result<EomMatrixSet, EomError> {
    check_reference(gs, m)?;
    let dets = excited_determinants(m, h.n_qubits())?;
    let states = dressed_states(gs, &dets)?;
    let h_states = states.par_iter().map(|s| h.apply(s)).collect::<Result<Vec<_>, _>>()?;
    let n = states.len();
    let mut mat = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            mat[(i, j)] = states[i].inner(&h_states[j]);
        }
        mat[(i, i)] -= gs.energy;
    }
    let mut set = EomMatrixSet::new(Method::QscEom, m.sector, gs.energy);
    set.m = Some(mat);
    Ok(set)
}

/// How the two-determinant references of the off-diagonal measurements are
/// prepared.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairPreparation {
    /// Amplitudes carry the fermionic signs of `Ĝ_I|Φ₀⟩` and `Ĝ_J|Φ₀⟩`.
    ExactPhase,
    /// NOT/H/S/CNOT gate sequence; fermionic signs are dropped, which
    /// conjugates `M` by a diagonal ±1 matrix.
    GateSequence,
}

#[derive(Clone, Copy, Debug)]
pub struct CircuitPathOptions {
    pub imaginary_part: bool,
    pub preparation: PairPreparation,
}

impl Default for CircuitPathOptions {
    fn default() -> Self {
        Self { imaginary_part: true, preparation: PairPreparation::ExactPhase }
    }
}

fn energy_of(gs: &GroundStateResult, h: &CompiledOperator, mut s: Statevector) -> Result<f64, EomError> {
    gs.ansatz.apply(&mut s)?;
    Ok(h.expectation(&s)?.re)
}

fn gate_prepared(gates: &[Gate], n_qubits: usize) -> Result<Statevector, StateError> {
    let mut s = Statevector::basis_state(0, n_qubits)?;
    for g in gates {
        s.apply_gate(*g)?;
    }
    Ok(s)
}

/// Builds `M` from energy measurements only: diagonals on single excited
/// determinants, off-diagonals from `(|I⟩ + |J⟩)/√2` (real part) and
/// `(|I⟩ + i|J⟩)/√2` (imaginary part) references.
pub fn build_m_circuit_path(
    gs: &GroundStateResult,
    h: &CompiledOperator,
    m: &Manifold,
    opts: CircuitPathOptions,
) -> Result<EomMatrixSet, EomError> {
    check_reference(gs, m)?;
    let nq = h.n_qubits();
    let dets = excited_determinants(m, nq)?;
    let n = dets.len();
    let diag: Vec<f64> = dets
        .par_iter()
        .map(|d| {
            let s = match opts.preparation {
                PairPreparation::ExactPhase => d.state(nq)?,
                PairPreparation::GateSequence => Statevector::basis_state(d.mask, nq)?,
            };
            energy_of(gs, h, s)
        })
        .collect::<Result<_, _>>()?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let off: Vec<Complex64> = pairs
        .par_iter()
        .map(|&(i, j)| -> Result<Complex64, EomError> {
            let (di, dj) = (dets[i], dets[j]);
            let mean = 0.5 * (diag[i] + diag[j]);
            match opts.preparation {
                PairPreparation::ExactPhase => {
                    let one = Complex64::new(dj.sign, 0.0);
                    let s = Statevector::signed_pair_state(di.mask, di.sign, dj.mask, one, nq)?;
                    let re = energy_of(gs, h, s)? - mean;
                    let im = if opts.imaginary_part {
                        let ph = Complex64::new(0.0, dj.sign);
                        let s = Statevector::signed_pair_state(di.mask, di.sign, dj.mask, ph, nq)?;
                        mean - energy_of(gs, h, s)?
                    } else {
                        0.0
                    };
                    Ok(Complex64::new(re, im))
                }
                PairPreparation::GateSequence => {
                    let gates = entangled_pair_circuit(di.mask, dj.mask)?;
                    let re = energy_of(gs, h, gate_prepared(&gates, nq)?)? - mean;
                    let im = if opts.imaginary_part {
                        let pivot = (di.mask ^ dj.mask).trailing_zeros() as usize;
                        let at = gates.iter().position(|g| *g == Gate::H(pivot)).expect("circuit has a Hadamard");
                        let mut with_s = gates.clone();
                        with_s.insert(at + 1, Gate::S(pivot));
                        let val = mean - energy_of(gs, h, gate_prepared(&with_s, nq)?)?;
                        // The phase lands on whichever branch has the pivot bit set.
                        if dj.mask >> pivot & 1 == 1 {
                            val
                        } else {
                            -val
                        }
                    } else {
                        0.0
                    };
                    Ok(Complex64::new(re, im))
                }
            }
        })
        .collect::<Result<_, _>>()?;
    let mut mat = CMatrix::zeros(n, n);
    for i in 0..n {
        mat[(i, i)] = Complex64::new(diag[i] - gs.energy, 0.0);
    }
    for (&(i, j), v) in pairs.iter().zip(off) {
        mat[(i, j)] = v;
        mat[(j, i)] = v.conj();
    }
    let mut set = EomMatrixSet::new(Method::QscEom, m.sector, gs.energy);
    set.m = Some(mat);
    Ok(set)
}

fn residual_norm(a: &CMatrix, x: &CVector, lambda: Complex64) -> f64 {
    (a * x - x * lambda).norm()
}

/// Hermitian eigensolve of a q-sc-EOM `M`.
pub fn solve_qsceom(mats: &EomMatrixSet) -> Result<SpectrumResult, EomError> {
    if mats.method != Method::QscEom {
        return Err(EomError::WrongMethod("q-sc-EOM", mats.method));
    }
    let m = mats.m.as_ref().expect("q-sc-EOM set carries M");
    let herm = hermiticity_error(m);
    if herm > HERMITIAN_TOL {
        return Err(EomError::NonHermitian(herm));
    }
    let mut diagnostics = Diagnostics::default();
    let roots = hermitian_eigh(m)
        .into_iter()
        .map(|(e, v)| {
            diagnostics.max_residual = diagnostics.max_residual.max(residual_norm(m, &v, Complex64::new(e, 0.0)));
            Root { delta_e: e, imag: 0.0, amplitudes: v }
        })
        .collect();
    Ok(SpectrumResult { method: Method::QscEom, sector: mats.sector, roots, diagnostics })
}

/// Which operators enter the qEOM commutators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorDressing {
    /// `Ĝ_I` acting on `|Ψ⟩`.
    Bare,
    /// `U Ĝ_I U†`, which annihilates `|Ψ⟩` on de-excitation.
    SelfConsistent,
}

/// qEOM blocks with `M_IJ = ⟨[Ĝ_I†,[H,Ĝ_J]]⟩`, `Q_IJ = −⟨[Ĝ_I†,[H,Ĝ_J†]]⟩`,
/// `V_IJ = ⟨[Ĝ_I†,Ĝ_J]⟩`, `W_IJ = −⟨[Ĝ_I†,Ĝ_J†]⟩` on the ground state.
pub fn build_qeom(
    gs: &GroundStateResult,
    h: &CompiledOperator,
    m: &Manifold,
    dressing: OperatorDressing,
) -> Result<EomMatrixSet, EomError> {
    check_reference(gs, m)?;
    let terms: Vec<FermionTerm> = m.entries.iter().map(|e| e.excitation().term()).collect();
    let psi = &gs.state;
    let apply = |t: &FermionTerm, x: &Statevector| -> Result<Statevector, EomError> {
        Ok(match dressing {
            OperatorDressing::Bare => x.apply_fermion_term(t),
            OperatorDressing::SelfConsistent => {
                let mut y = x.clone();
                gs.ansatz.apply_inverse(&mut y)?;
                let mut z = y.apply_fermion_term(t);
                gs.ansatz.apply(&mut z)?;
                z
            }
        })
    };
    let h_psi = h.apply(psi)?;
    struct Vectors {
        u: Statevector,
        d: Statevector,
        v: Statevector,
        w: Statevector,
        hu: Statevector,
        hd: Statevector,
    }
    let vecs: Vec<Vectors> = terms
        .par_iter()
        .map(|t| -> Result<Vectors, EomError> {
            let td = t.dagger();
            let u = apply(t, psi)?;
            let d = apply(&td, psi)?;
            let v = apply(t, &h_psi)?;
            let w = apply(&td, &h_psi)?;
            let hu = h.apply(&u)?;
            let hd = h.apply(&d)?;
            Ok(Vectors { u, d, v, w, hu, hd })
        })
        .collect::<Result<_, _>>()?;
    let n = vecs.len();
    let (mut mm, mut qm, mut vm, mut wm) = (CMatrix::zeros(n, n), CMatrix::zeros(n, n), CMatrix::zeros(n, n), CMatrix::zeros(n, n));
    for i in 0..n {
        let a = &vecs[i];
        for j in 0..n {
            let b = &vecs[j];
            mm[(i, j)] = a.u.inner(&b.hu) - a.u.inner(&b.v) - b.w.inner(&a.d) + b.d.inner(&a.hd);
            qm[(i, j)] = -(a.u.inner(&b.hd) - a.u.inner(&b.w) - b.v.inner(&a.d) + b.u.inner(&a.hd));
            vm[(i, j)] = a.u.inner(&b.u) - b.d.inner(&a.d);
            wm[(i, j)] = -(a.u.inner(&b.d) - b.u.inner(&a.d));
        }
    }
    let mut set = EomMatrixSet::new(Method::Qeom, m.sector, gs.energy);
    set.m = Some(mm);
    set.q = Some(qm);
    set.v = Some(vm);
    set.w = Some(wm);
    Ok(set)
}

/// Solves `[[M,Q],[Q*,M*]] x = λ [[V,W],[−W*,−V*]] x`.
///
/// The metric is reduced by SVD, keeping singular values above `threshold`.
/// Roots whose upper block carries more weight than the lower one are
/// returned, sorted by real part.
pub fn solve_paired_geneig(mats: &EomMatrixSet, threshold: f64) -> Result<SpectrumResult, EomError> {
    if mats.method != Method::Qeom {
        return Err(EomError::WrongMethod("paired qEOM", mats.method));
    }
    let (m, q, v, w) = (
        mats.m.as_ref().expect("qEOM set carries M"),
        mats.q.as_ref().expect("qEOM set carries Q"),
        mats.v.as_ref().expect("qEOM set carries V"),
        mats.w.as_ref().expect("qEOM set carries W"),
    );
    let n = m.nrows();
    let mut a = CMatrix::zeros(2 * n, 2 * n);
    let mut b = CMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, 0), (n, n)).copy_from(m);
    a.view_mut((0, n), (n, n)).copy_from(q);
    a.view_mut((n, 0), (n, n)).copy_from(&q.map(|x| x.conj()));
    a.view_mut((n, n), (n, n)).copy_from(&m.map(|x| x.conj()));
    b.view_mut((0, 0), (n, n)).copy_from(v);
    b.view_mut((0, n), (n, n)).copy_from(w);
    b.view_mut((n, 0), (n, n)).copy_from(&w.map(|x| -x.conj()));
    b.view_mut((n, n), (n, n)).copy_from(&v.map(|x| -x.conj()));

    let mut diagnostics = Diagnostics::default();
    if n == 0 {
        return Ok(SpectrumResult { method: Method::Qeom, sector: mats.sector, roots: Vec::new(), diagnostics });
    }
    let svd = b.clone().svd(true, true);
    let (u_full, vt_full) = (svd.u.expect("requested U"), svd.v_t.expect("requested V†"));
    let kept: Vec<usize> = (0..2 * n).filter(|&k| svd.singular_values[k] > threshold).collect();
    diagnostics.discarded_directions = 2 * n - kept.len();
    if diagnostics.discarded_directions > 0 {
        debug!("paired qEOM: discarded {} metric directions", diagnostics.discarded_directions);
    }
    if kept.is_empty() {
        return Err(EomError::EmptySubspace(threshold));
    }
    let k = kept.len();
    let mut uk = CMatrix::zeros(2 * n, k);
    let mut vk = CMatrix::zeros(2 * n, k);
    for (c, &idx) in kept.iter().enumerate() {
        let inv = Complex64::new(1.0 / svd.singular_values[idx], 0.0);
        uk.set_column(c, &(u_full.column(idx) * inv));
        vk.set_column(c, &vt_full.row(idx).adjoint());
    }
    let reduced = uk.adjoint() * &a * &vk;
    let mut roots = Vec::new();
    for (lambda, y) in general_eig(&reduced) {
        let x = &vk * y;
        let top = x.rows(0, n).norm();
        let bottom = x.rows(n, n).norm();
        let resid = (&a * &x - (&b * &x) * lambda).norm() / x.norm();
        diagnostics.max_residual = diagnostics.max_residual.max(resid);
        if top > bottom {
            diagnostics.max_imag = diagnostics.max_imag.max(lambda.im.abs());
            let mut amps: CVector = x.rows(0, n).into_owned();
            crate::linalg::fix_phase(&mut amps);
            roots.push(Root { delta_e: lambda.re, imag: lambda.im, amplitudes: amps });
        }
    }
    roots.sort_by(|x, y| x.delta_e.total_cmp(&y.delta_e));
    Ok(SpectrumResult { method: Method::Qeom, sector: mats.sector, roots, diagnostics })
}

/// QSE subspace `{|Ψ⟩} ∪ {Ĝ_I|Ψ⟩}`; the identity is only added for EE.
pub fn build_qse(
    gs: &GroundStateResult,
    h: &CompiledOperator,
    m: &Manifold,
    include_identity: bool,
) -> Result<EomMatrixSet, EomError> {
    check_reference(gs, m)?;
    let with_identity = include_identity && m.sector == Sector::EE;
    let mut vectors = Vec::with_capacity(m.len() + 1);
    if with_identity {
        vectors.push(gs.state.clone());
    }
    vectors.extend(m.entries.par_iter().map(|e| gs.state.apply_fermion_term(&e.excitation().term())).collect::<Vec<_>>());
    let h_vectors = vectors.par_iter().map(|s| h.apply(s)).collect::<Result<Vec<_>, _>>()?;
    let n = vectors.len();
    let mut hs = CMatrix::zeros(n, n);
    let mut ss = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            hs[(i, j)] = vectors[i].inner(&h_vectors[j]);
            ss[(i, j)] = vectors[i].inner(&vectors[j]);
        }
    }
    let mut set = EomMatrixSet::new(Method::Qse, m.sector, gs.energy);
    set.h_sub = Some(hs);
    set.s_sub = Some(ss);
    set.includes_identity = with_identity;
    Ok(set)
}

/// Canonical-orthogonalization solve of the QSE pencil.
///
/// With the identity operator the lowest root is the subspace ground state
/// and `ΔE_k = E_k − E_0` for the remaining roots; otherwise
/// `ΔE_k = E_k − E_gr`.
pub fn solve_qse(mats: &EomMatrixSet, threshold: f64) -> Result<SpectrumResult, EomError> {
    if mats.method != Method::Qse {
        return Err(EomError::WrongMethod("QSE", mats.method));
    }
    let hs = mats.h_sub.as_ref().expect("QSE set carries H_sub");
    let ss = mats.s_sub.as_ref().expect("QSE set carries S_sub");
    let mut diagnostics = Diagnostics::default();
    if hs.nrows() == 0 {
        return Ok(SpectrumResult { method: Method::Qse, sector: mats.sector, roots: Vec::new(), diagnostics });
    }
    let (x, dropped) = canonical_orthogonalizer(ss, threshold);
    diagnostics.discarded_directions = dropped;
    if dropped > 0 {
        debug!("QSE: discarded {dropped} overlap directions");
    }
    if x.ncols() == 0 {
        return Err(EomError::EmptySubspace(threshold));
    }
    let hp = x.adjoint() * hs * &x;
    let eig = hermitian_eigh(&hp);
    let mut roots: Vec<Root> = eig
        .into_iter()
        .map(|(e, y)| Root { delta_e: e, imag: 0.0, amplitudes: &x * y })
        .collect();
    let origin = if mats.includes_identity {
        let ground = roots.remove(0).delta_e;
        diagnostics.subspace_ground = Some(ground);
        ground
    } else {
        mats.e_gr
    };
    for r in &mut roots {
        let resid = (hs * &r.amplitudes - (ss * &r.amplitudes) * Complex64::new(r.delta_e, 0.0)).norm();
        diagnostics.max_residual = diagnostics.max_residual.max(resid);
        r.delta_e -= origin;
    }
    Ok(SpectrumResult { method: Method::Qse, sector: mats.sector, roots, diagnostics })
}

/// Plain-text matrix dump: the dimension on the first line, then one
/// `re im` pair per line in row-major order.
pub fn dump_matrix(m: &CMatrix) -> String {
    let mut out = format!("{}\n", m.nrows());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let _ = writeln!(out, "{:.17e} {:.17e}", m[(i, j)].re, m[(i, j)].im);
        }
    }
    out
}

pub fn parse_matrix_dump(text: &str) -> Result<CMatrix, EomError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let n: usize = lines
        .next()
        .and_then(|l| l.parse().ok())
        .ok_or_else(|| EomError::Dump("missing dimension line".into()))?;
    let mut m = CMatrix::zeros(n, n);
    for k in 0..n * n {
        let line = lines.next().ok_or_else(|| EomError::Dump(format!("expected {} entries, found {k}", n * n)))?;
        let mut it = line.split_whitespace().map(str::parse::<f64>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(re)), Some(Ok(im)), None) => m[(k / n, k % n)] = Complex64::new(re, im),
            _ => return Err(EomError::Dump(format!("bad entry {line:?}"))),
        }
    }
    if lines.next().is_some() {
        return Err(EomError::Dump("trailing data".into()));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn qsceom_set(m: CMatrix) -> EomMatrixSet {
        let mut s = EomMatrixSet::new(Method::QscEom, Sector::EE, 0.0);
        s.m = Some(m);
        s
    }

    #[test]
    fn one_by_one_root() {
        let r = solve_qsceom(&qsceom_set(CMatrix::from_element(1, 1, c(0.37, 0.0)))).unwrap();
        assert_eq!(r.delta_energies(), vec![0.37]);
    }

    #[test]
    fn empty_matrix_gives_no_roots() {
        let r = solve_qsceom(&qsceom_set(CMatrix::zeros(0, 0))).unwrap();
        assert!(r.roots.is_empty());
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(1.0, 0.0)]);
        assert!(matches!(solve_qsceom(&qsceom_set(m)), Err(EomError::NonHermitian(_))));
    }

    #[test]
    fn paired_solve_with_identity_metric_matches_hermitian_solve() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.05), c(0.1, -0.05), c(0.9, 0.0)]);
        let mut s = EomMatrixSet::new(Method::Qeom, Sector::EE, 0.0);
        s.m = Some(m.clone());
        s.q = Some(CMatrix::zeros(2, 2));
        s.v = Some(CMatrix::identity(2, 2));
        s.w = Some(CMatrix::zeros(2, 2));
        let paired = solve_paired_geneig(&s, CANONICAL_THRESHOLD).unwrap();
        let plain = solve_qsceom(&qsceom_set(m)).unwrap();
        assert_eq!(paired.roots.len(), 2);
        for (a, b) in paired.delta_energies().iter().zip(plain.delta_energies()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(paired.diagnostics.max_imag < 1e-12);
    }

    #[test]
    fn qse_with_identity_overlap_is_an_ordinary_eigensolve() {
        let mut s = EomMatrixSet::new(Method::Qse, Sector::EE, -1.0);
        s.h_sub = Some(CMatrix::from_row_slice(2, 2, &[c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]));
        s.s_sub = Some(CMatrix::identity(2, 2));
        s.includes_identity = true;
        let r = solve_qse(&s, CANONICAL_THRESHOLD).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0].delta_e - 1.5).abs() < 1e-12);
        assert_eq!(r.diagnostics.subspace_ground, Some(-1.0));
    }

    #[test]
    fn qse_with_null_overlap_errors() {
        let mut s = EomMatrixSet::new(Method::Qse, Sector::IP, 0.0);
        s.h_sub = Some(CMatrix::identity(1, 1));
        s.s_sub = Some(CMatrix::zeros(1, 1));
        assert!(matches!(solve_qse(&s, CANONICAL_THRESHOLD), Err(EomError::EmptySubspace(_))));
    }

    #[test]
    fn matrix_dump_round_trip() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, -0.0), c(0.1, 1e-17), c(-3.25, 2.0), c(1e300, 0.0)]);
        assert_eq!(parse_matrix_dump(&dump_matrix(&m)).unwrap(), m);
        assert!(parse_matrix_dump("2\n1 0\n").is_err());
    }
}
