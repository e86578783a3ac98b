//! ADAPT-VQE with a generalized singles and doubles pool, and a BFGS VQE
//! minimizer for fixed ansätze.

use std::fmt::Write as _;

use log::{debug, info};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::chem_io::spin_of;
use crate::operator_algebra::{AlgebraError, FermionExcitation};
use crate::statevector::{CompiledOperator, StateError, Statevector};

#[derive(Debug, Error)]
pub enum GroundStateError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("{0}")]
    Domain(String),
    #[error("ansatz checkpoint: {0}")]
    Checkpoint(String),
}

/// Generalized singles and doubles over `n_so` interleaved spin orbitals.
///
/// Singles `p → q` (p < q, same spin) and doubles `pq → rs` with `p < q`,
/// `r < s`, `(p,q) < (r,s)` and matching spin content. Each entry `T` stands
/// for the generator `T − T†`; the opposite orientation is the same generator
/// up to sign and is not repeated.
pub fn build_gsd_pool(n_so: usize) -> Vec<FermionExcitation> {
    let mut pool = Vec::new();
    for p in 0..n_so {
        for q in p + 1..n_so {
            if spin_of(p) == spin_of(q) {
                pool.push(FermionExcitation::new(vec![q], vec![p]));
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n_so)
        .flat_map(|p| (p + 1..n_so).map(move |q| (p, q)))
        .collect();
    for (k, &(p, q)) in pairs.iter().enumerate() {
        for &(r, s) in &pairs[k + 1..] {
            if spin_of(p) + spin_of(q) == spin_of(r) + spin_of(s) {
                pool.push(FermionExcitation::new(vec![r, s], vec![q, p]));
            }
        }
    }
    pool
}

/// `U(θ) = Π_k exp(θ_k (T_k − T_k†))`, first entry applied first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnsatzCircuit {
    pub n_qubits: usize,
    pub ops: Vec<(FermionExcitation, f64)>,
}

impl AnsatzCircuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, ops: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.ops.iter().map(|(_, t)| *t).collect()
    }

    pub fn set_angles(&mut self, angles: &[f64]) {
        assert_eq!(angles.len(), self.ops.len());
        for ((_, t), a) in self.ops.iter_mut().zip(angles) {
            *t = *a;
        }
    }

    pub fn apply(&self, state: &mut Statevector) -> Result<(), StateError> {
        if state.n_qubits() != self.n_qubits {
            return Err(StateError::DimensionMismatch { state: state.n_qubits(), op: self.n_qubits });
        }
        for (ex, theta) in &self.ops {
            state.apply_excitation_rotation(ex, *theta);
        }
        Ok(())
    }

    pub fn apply_inverse(&self, state: &mut Statevector) -> Result<(), StateError> {
        if state.n_qubits() != self.n_qubits {
            return Err(StateError::DimensionMismatch { state: state.n_qubits(), op: self.n_qubits });
        }
        for (ex, theta) in self.ops.iter().rev() {
            state.apply_excitation_rotation(ex, -*theta);
        }
        Ok(())
    }

    /// Checkpoint text: a `qubits N` line, then `descriptor angle` per operator.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.n_qubits);
        for (ex, t) in &self.ops {
            let _ = writeln!(out, "{} {:.17e}", ex.descriptor(), t);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, GroundStateError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let head = lines.next().ok_or_else(|| GroundStateError::Checkpoint("empty file".into()))?;
        let n_qubits = head
            .strip_prefix("qubits ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| GroundStateError::Checkpoint(format!("bad header {head:?}")))?;
        let mut ops = Vec::new();
        for line in lines {
            let (d, t) = line
                .trim()
                .split_once(' ')
                .ok_or_else(|| GroundStateError::Checkpoint(format!("bad line {line:?}")))?;
            let ex = FermionExcitation::parse_descriptor(d)?;
            if ex.max_index() >= n_qubits {
                return Err(GroundStateError::Checkpoint(format!("index out of range in {line:?}")));
            }
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|_| GroundStateError::Checkpoint(format!("bad angle in {line:?}")))?;
            ops.push((ex, t));
        }
        Ok(Self { n_qubits, ops })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VqeOptions {
    /// Convergence threshold on the gradient max-norm.
    pub gtol: f64,
    pub max_iterations: usize,
}

impl Default for VqeOptions {
    fn default() -> Self {
        Self { gtol: 1e-8, max_iterations: 1000 }
    }
}

#[derive(Clone, Debug)]
pub struct VqeOutcome {
    pub energy: f64,
    pub angles: Vec<f64>,
    pub gradient_max: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Energy and analytic gradient of `⟨ref|U†HU|ref⟩`.
struct EnergyModel<'a> {
    h: &'a CompiledOperator,
    reference: &'a Statevector,
    ops: &'a [FermionExcitation],
}

impl EnergyModel<'_> {
    fn state(&self, angles: &[f64]) -> Statevector {
        let mut psi = self.reference.clone();
        for (ex, t) in self.ops.iter().zip(angles) {
            psi.apply_excitation_rotation(ex, *t);
        }
        psi
    }

    /// Reverse sweep: `dE/dθ_k = 2 Re⟨λ_k|G_k|φ_k⟩` with `λ_k = U_{>k}† H ψ`.
    fn energy_and_gradient(&self, angles: &[f64]) -> (f64, Vec<f64>) {
        let mut phi = self.state(angles);
        let mut lambda = self.h.apply(&phi).expect("dimensions checked");
        let energy = phi.inner(&lambda).re;
        let mut grad = vec![0.0; angles.len()];
        for k in (0..angles.len()).rev() {
            let g_phi = phi.apply_excitation_generator(&self.ops[k]);
            grad[k] = 2.0 * lambda.inner(&g_phi).re;
            phi.apply_excitation_rotation(&self.ops[k], -angles[k]);
            lambda.apply_excitation_rotation(&self.ops[k], -angles[k]);
        }
        (energy, grad)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS minimization of the ansatz energy from `initial` angles.
///
/// The returned energy never exceeds the energy at `initial`. If the gradient
/// tolerance is not met within `max_iterations`, `converged` is false.
pub fn vqe_minimize(
    h: &CompiledOperator,
    reference: &Statevector,
    ansatz: &AnsatzCircuit,
    initial: &[f64],
    opts: VqeOptions,
) -> Result<VqeOutcome, GroundStateError> {
    if ansatz.is_empty() {
        return Err(GroundStateError::Domain("cannot optimize an empty ansatz".into()));
    }
    if initial.len() != ansatz.len() {
        return Err(GroundStateError::Domain(format!(
            "{} initial angles for {} operators",
            initial.len(),
            ansatz.len()
        )));
    }
    if h.n_qubits() != reference.n_qubits() || ansatz.n_qubits != reference.n_qubits() {
        return Err(StateError::DimensionMismatch { state: reference.n_qubits(), op: h.n_qubits() }.into());
    }
    let ops: Vec<FermionExcitation> = ansatz.ops.iter().map(|(e, _)| e.clone()).collect();
    let model = EnergyModel { h, reference, ops: &ops };
    let n = initial.len();

    let mut x = initial.to_vec();
    let (mut f, mut g) = model.energy_and_gradient(&x);
    let f0 = f;
    let mut hinv = identity(n);
    let mut iterations = 0;
    // Energy values below this spread are indistinguishable from roundoff.
    let noise = 1e-14 * f.abs().max(1.0);
    while iterations < opts.max_iterations && max_abs(&g) > opts.gtol {
        iterations += 1;
        let mut p = matvec_neg(&hinv, &g);
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            hinv = identity(n);
            p = g.iter().map(|v| -v).collect();
            slope = dot(&g, &p);
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + alpha * b).collect();
            let (fn_, gn) = model.energy_and_gradient(&xn);
            let armijo = fn_ <= f + 1e-4 * alpha * slope;
            // In the roundoff regime accept steps that reduce the directional
            // derivative without raising the energy beyond noise.
            let flat = fn_ <= f + noise && dot(&gn, &p).abs() < slope.abs();
            if armijo || flat {
                accepted = Some((xn, fn_, gn));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            debug!("line search failed at iteration {iterations}");
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-18 {
            bfgs_update(&mut hinv, &s, &y, sy);
        }
        x = xn;
        f = fn_;
        g = gn;
    }
    if f > f0 {
        x = initial.to_vec();
        let (f_init, g_init) = model.energy_and_gradient(&x);
        f = f_init;
        g = g_init;
    }
    let gradient_max = max_abs(&g);
    Ok(VqeOutcome {
        energy: f,
        angles: x,
        gradient_max,
        iterations,
        converged: gradient_max <= opts.gtol,
    })
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn matvec_neg(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| -dot(row, v)).collect()
}

fn bfgs_update(hinv: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = hinv.iter().map(|row| dot(row, y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            hinv[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptOptions {
    pub grad_threshold: f64,
    pub max_operators: Option<usize>,
    pub vqe: VqeOptions,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        Self { grad_threshold: 1e-3, max_operators: None, vqe: VqeOptions::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdaptStop {
    GradientThreshold,
    MaxOperators,
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub energy: f64,
    pub ansatz: AnsatzCircuit,
    pub reference: Statevector,
    pub state: Statevector,
    /// Largest pool-gradient magnitude at each ADAPT iteration.
    pub gradient_norm_history: Vec<f64>,
    /// Energy after each ADAPT iteration, starting with the reference energy.
    pub energy_history: Vec<f64>,
    pub stop: AdaptStop,
    /// False if any inner VQE failed to meet its gradient tolerance.
    pub vqe_converged: bool,
}

impl GroundStateResult {
    /// Ground state of a fixed ansatz with given angles (no optimization).
    pub fn from_ansatz(
        h: &CompiledOperator,
        reference: Statevector,
        ansatz: AnsatzCircuit,
    ) -> Result<Self, GroundStateError> {
        let mut state = reference.clone();
        ansatz.apply(&mut state)?;
        let energy = h.expectation(&state)?.re;
        Ok(Self {
            energy,
            ansatz,
            reference,
            state,
            gradient_norm_history: Vec::new(),
            energy_history: vec![energy],
            stop: AdaptStop::GradientThreshold,
            vqe_converged: true,
        })
    }
}

/// Pool gradients `⟨ψ|[H, T − T†]|ψ⟩ = 2 Re⟨Hψ|(T − T†)ψ⟩`.
pub fn pool_gradients(h: &CompiledOperator, psi: &Statevector, pool: &[FermionExcitation]) -> Result<Vec<f64>, StateError> {
    let h_psi = h.apply(psi)?;
    Ok(pool
        .par_iter()
        .map(|ex| 2.0 * h_psi.inner(&psi.apply_excitation_generator(ex)).re)
        .collect())
}

/// Index of the largest |gradient|; ties within 1e-12 go to the lower index.
fn select_operator(grads: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, g) in grads.iter().enumerate() {
        let m = g.abs();
        match best {
            Some((_, b)) if m <= b + 1e-12 => {}
            _ => best = Some((k, m)),
        }
    }
    best
}

pub fn adapt_vqe(
    h: &CompiledOperator,
    reference: &Statevector,
    pool: &[FermionExcitation],
    opts: AdaptOptions,
) -> Result<GroundStateResult, GroundStateError> {
    if pool.is_empty() {
        return Err(GroundStateError::Domain("operator pool is empty".into()));
    }
    if h.n_qubits() != reference.n_qubits() {
        return Err(StateError::DimensionMismatch { state: reference.n_qubits(), op: h.n_qubits() }.into());
    }
    let mut ansatz = AnsatzCircuit::new(reference.n_qubits());
    let mut state = reference.clone();
    let mut energy = h.expectation(&state)?.re;
    let mut gradient_norm_history = Vec::new();
    let mut energy_history = vec![energy];
    let mut vqe_converged = true;
    let stop = loop {
        let grads = pool_gradients(h, &state, pool)?;
        let (best, gmax) = select_operator(&grads).expect("pool nonempty");
        gradient_norm_history.push(gmax);
        if gmax < opts.grad_threshold {
            break AdaptStop::GradientThreshold;
        }
        if opts.max_operators.is_some_and(|m| ansatz.len() >= m) {
            break AdaptStop::MaxOperators;
        }
        ansatz.ops.push((pool[best].clone(), 0.0));
        let outcome = vqe_minimize(h, reference, &ansatz, &ansatz.angles(), opts.vqe)?;
        vqe_converged &= outcome.converged;
        ansatz.set_angles(&outcome.angles);
        state = reference.clone();
        ansatz.apply(&mut state)?;
        energy = outcome.energy;
        energy_history.push(energy);
        info!(
            "ADAPT iter {}: op {} |g|={gmax:.3e} E={energy:.12} ({} BFGS its)",
            ansatz.len(),
            pool[best].descriptor(),
            outcome.iterations
        );
    };
    Ok(GroundStateResult {
        energy,
        ansatz,
        reference: reference.clone(),
        state,
        gradient_norm_history,
        energy_history,
        stop,
        vqe_converged,
    })
}

/// Closed-shell or high-spin Hartree–Fock determinant over interleaved spin
/// orbitals: the lowest `(N+ms2)/2` alpha and `(N−ms2)/2` beta orbitals.
pub fn reference_mask(n_electrons: usize, ms2: i32) -> Result<u64, GroundStateError> {
    let n = n_electrons as i32;
    if (n + ms2) % 2 != 0 || ms2.abs() > n {
        return Err(GroundStateError::Domain(format!("inconsistent N={n_electrons}, MS2={ms2}")));
    }
    let n_alpha = ((n + ms2) / 2) as usize;
    let n_beta = ((n - ms2) / 2) as usize;
    let mut mask = 0u64;
    for p in 0..n_alpha {
        mask |= 1 << (2 * p);
    }
    for p in 0..n_beta {
        mask |= 1 << (2 * p + 1);
    }
    Ok(mask)
}

/// `⟨ψ|[H, g]|ψ⟩` expressed through a complex inner product, for tests that
/// compare against finite differences.
pub fn commutator_expectation(h: &CompiledOperator, psi: &Statevector, ex: &FermionExcitation) -> Result<Complex64, StateError> {
    let h_psi = h.apply(psi)?;
    let g_psi = psi.apply_excitation_generator(ex);
    let h_g_psi = h.apply(&g_psi)?;
    // ⟨ψ|H g|ψ⟩ − ⟨ψ|g H|ψ⟩ with g† = −g.
    Ok(psi.inner(&h_g_psi) + g_psi.inner(&h_psi))
}
