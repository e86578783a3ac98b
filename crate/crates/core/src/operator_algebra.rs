//! Fermionic operators, the Jordan–Wigner mapping, and sparse Pauli-sum
//! arithmetic.
//!
//! A Pauli string is stored as a pair of bitmasks `(x, z)`; qubit `k` carries
//! `I` for `(0,0)`, `X` for `(1,0)`, `Z` for `(0,1)` and `Y` for `(1,1)`.
//! Strings of up to 64 qubits are supported.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::chem_io::{spin_of, SpinOrbitalHamiltonianCoefficients};

/// Coefficients with magnitude below this are dropped.
pub const PRUNE_TOL: f64 = 1e-12;

pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum AlgebraError {
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),
    #[error("spin-orbital index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("{0}")]
    Parse(String),
}

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS);
        Self { n_qubits, x: 0, z: 0 }
    }

    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Self {
        assert!(n_qubits <= MAX_QUBITS);
        let keep = if n_qubits == 64 { u64::MAX } else { (1u64 << n_qubits) - 1 };
        assert!(x & !keep == 0 && z & !keep == 0, "mask exceeds qubit count");
        Self { n_qubits, x, z }
    }

    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n_qubits);
        s.set(qubit, p);
        s
    }

    /// Parses letters written from qubit `n-1` down to qubit 0.
    pub fn from_letters(letters: &str) -> Result<Self, AlgebraError> {
        let n = letters.chars().count();
        if n > MAX_QUBITS {
            return Err(AlgebraError::Parse(format!("{n} qubits exceeds {MAX_QUBITS}")));
        }
        let mut s = Self::identity(n);
        for (pos, ch) in letters.chars().enumerate() {
            let q = n - 1 - pos;
            let p = match ch {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(AlgebraError::Parse(format!("bad Pauli letter {other:?}"))),
            };
            s.set(q, p);
        }
        Ok(s)
    }

    fn set(&mut self, qubit: usize, p: Pauli) {
        assert!(qubit < self.n_qubits);
        let bit = 1u64 << qubit;
        self.x &= !bit;
        self.z &= !bit;
        match p {
            Pauli::I => {}
            Pauli::X => self.x |= bit,
            Pauli::Z => self.z |= bit,
            Pauli::Y => {
                self.x |= bit;
                self.z |= bit
            }
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        let bit = 1u64 << qubit;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of `Y` factors, i.e. the power of `i` relating the string to
    /// `X^x Z^z`.
    #[inline]
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Product `self * other = phase * result`.
    pub fn multiply(&self, other: &Self) -> (Complex64, Self) {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // P = i^{|x&z|} X^x Z^z, and Z^z1 X^x2 = (-1)^{|z1&x2|} X^x2 Z^z1.
        let mut k = self.y_count() as i64 + other.y_count() as i64 - (x & z).count_ones() as i64;
        k += 2 * (self.z & other.x).count_ones() as i64;
        let phase = i_pow(k);
        (phase, Self { n_qubits: self.n_qubits, x, z })
    }

    /// Action on a computational basis state: `P|b> = phase |b'>`.
    #[inline]
    pub fn apply_to_basis(&self, b: u64) -> (Complex64, u64) {
        let sign = if (self.z & b).count_ones() % 2 == 1 { 2 } else { 0 };
        (i_pow(self.y_count() as i64 + sign), b ^ self.x)
    }

    pub fn letters(&self) -> String {
        (0..self.n_qubits).rev().map(|q| self.get(q).letter()).collect()
    }
}

impl Ord for PauliString {
    /// Lexicographic over letters read from the highest qubit, `I < X < Y < Z`.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.n_qubits.cmp(&other.n_qubits).then_with(|| {
            for q in (0..self.n_qubits).rev() {
                let c = self.get(q).cmp(&other.get(q));
                if c.is_ne() {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.letters())
    }
}

#[inline]
pub(crate) fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Sparse linear combination of Pauli strings, canonicalized and pruned.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize, coeff: Complex64) -> Self {
        Self::from_terms(n_qubits, [(PauliString::identity(n_qubits), coeff)])
    }

    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = (PauliString, Complex64)>) -> Self {
        let mut s = Self::zero(n_qubits);
        for (p, c) in terms {
            assert_eq!(p.n_qubits, n_qubits, "term qubit count mismatch");
            s.accumulate(p, c);
        }
        s.prune();
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    fn accumulate(&mut self, p: PauliString, c: Complex64) {
        *self.terms.entry(p).or_default() += c;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_TOL);
    }

    fn check(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.n_qubits != other.n_qubits {
            Err(AlgebraError::QubitMismatch(self.n_qubits, other.n_qubits))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.accumulate(*p, *c);
        }
        out.prune();
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let mut out = Self::zero(self.n_qubits);
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                let (phase, r) = p.multiply(q);
                out.accumulate(r, phase * a * b);
            }
        }
        out.prune();
        Ok(out)
    }

    /// `[self, other] = self*other - other*self`.
    pub fn commutator(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let mut out = Self::zero(self.n_qubits);
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                // Pauli strings either commute or anticommute.
                let (phase, r) = p.multiply(q);
                let anticommute = ((p.x & q.z).count_ones() + (p.z & q.x).count_ones()) % 2 == 1;
                if anticommute {
                    out.accumulate(r, 2.0 * phase * a * b);
                }
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.try_mul(other)?.try_add(&other.try_mul(self)?)
    }

    pub fn hermitian_conjugate(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(p, c)| (*p, c.conj())).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(p, c)| (*p, c * factor)).collect(),
        };
        out.prune();
        out
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (p, c) in &self.terms {
            worst = worst.max((c - other.coeff(p)).norm());
        }
        for (p, c) in &other.terms {
            if !self.terms.contains_key(p) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.re.abs() <= tol)
    }

    /// Sum of coefficient magnitudes, an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Text dump: one `coeff_re coeff_im letters` line per term.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, c) in &self.terms {
            out.push_str(&format!("{:.17e} {:.17e} {}\n", c.re, c.im, p.letters()));
        }
        out
    }

    pub fn from_text(n_qubits: usize, text: &str) -> Result<Self, AlgebraError> {
        let mut terms = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(AlgebraError::Parse(format!("bad term line {line:?}")));
            }
            let re: f64 = toks[0].parse().map_err(|_| AlgebraError::Parse(toks[0].into()))?;
            let im: f64 = toks[1].parse().map_err(|_| AlgebraError::Parse(toks[1].into()))?;
            let p = PauliString::from_letters(toks[2])?;
            if p.n_qubits != n_qubits {
                return Err(AlgebraError::QubitMismatch(n_qubits, p.n_qubits));
            }
            terms.push((p, Complex64::new(re, im)));
        }
        Ok(Self::from_terms(n_qubits, terms))
    }
}

impl Add for &PauliSum {
    type Output = PauliSum;
    fn add(self, rhs: &PauliSum) -> PauliSum {
        self.try_add(rhs).expect("qubit count mismatch")
    }
}

impl Sub for &PauliSum {
    type Output = PauliSum;
    fn sub(self, rhs: &PauliSum) -> PauliSum {
        self.try_add(&-rhs).expect("qubit count mismatch")
    }
}

impl Mul for &PauliSum {
    type Output = PauliSum;
    fn mul(self, rhs: &PauliSum) -> PauliSum {
        self.try_mul(rhs).expect("qubit count mismatch")
    }
}

impl Neg for &PauliSum {
    type Output = PauliSum;
    fn neg(self) -> PauliSum {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// A single ladder operator: `a†_index` when `creation`, else `a_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ladder {
    pub index: usize,
    pub creation: bool,
}

impl Ladder {
    pub fn create(index: usize) -> Self {
        Self { index, creation: true }
    }
    pub fn annihilate(index: usize) -> Self {
        Self { index, creation: false }
    }
    pub fn dagger(self) -> Self {
        Self { creation: !self.creation, ..self }
    }
}

/// Product of ladder operators (leftmost acts last) times a coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionTerm {
    pub ops: Vec<Ladder>,
    pub coeff: Complex64,
}

impl FermionTerm {
    pub fn new(ops: Vec<Ladder>, coeff: Complex64) -> Self {
        Self { ops, coeff }
    }

    pub fn dagger(&self) -> Self {
        Self {
            ops: self.ops.iter().rev().map(|l| l.dagger()).collect(),
            coeff: self.coeff.conj(),
        }
    }

    /// Action on a basis determinant, applying the rightmost operator first.
    /// Returns `None` when the determinant is annihilated.
    pub fn apply_to_basis(&self, mut b: u64) -> Option<(f64, u64)> {
        let mut sign = 1.0;
        for op in self.ops.iter().rev() {
            let bit = 1u64 << op.index;
            let occupied = b & bit != 0;
            if occupied == op.creation {
                return None;
            }
            if (b & (bit - 1)).count_ones() % 2 == 1 {
                sign = -sign;
            }
            b ^= bit;
        }
        Some((sign, b))
    }
}

fn ladder_image(l: Ladder, n_qubits: usize) -> PauliSum {
    let below = (1u64 << l.index) - 1;
    let bit = 1u64 << l.index;
    // a† = (X - iY)/2, a = (X + iY)/2 on qubit p, with Z on every lower qubit.
    let x_term = PauliString::from_masks(n_qubits, bit, below);
    let y_term = PauliString::from_masks(n_qubits, bit, below | bit);
    let y_coeff = if l.creation { -0.5 * I } else { 0.5 * I };
    PauliSum::from_terms(n_qubits, [(x_term, Complex64::new(0.5, 0.0)), (y_term, y_coeff)])
}

/// Jordan–Wigner image of a fermionic product.
pub fn jordan_wigner(term: &FermionTerm, n_qubits: usize) -> Result<PauliSum, AlgebraError> {
    if n_qubits > MAX_QUBITS {
        return Err(AlgebraError::IndexOutOfRange { index: n_qubits, n_qubits: MAX_QUBITS });
    }
    let mut acc = PauliSum::identity(n_qubits, term.coeff);
    for &l in &term.ops {
        if l.index >= n_qubits {
            return Err(AlgebraError::IndexOutOfRange { index: l.index, n_qubits });
        }
        acc = acc.try_mul(&ladder_image(l, n_qubits))?;
    }
    Ok(acc)
}

/// Qubit Hamiltonian `Σ h_pq a†p aq + ¼ Σ <pq||rs> a†p a†q as ar + e_core`.
pub fn build_qubit_hamiltonian(so: &SpinOrbitalHamiltonianCoefficients) -> PauliSum {
    let n = so.n_so;
    let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
    let mut push = |term: FermionTerm| {
        let image = jordan_wigner(&term, n).expect("indices within range");
        for (p, c) in image.iter() {
            *acc.entry(*p).or_default() += c;
        }
    };
    for p in 0..n {
        for q in 0..n {
            let h = so.h(p, q);
            if h != 0.0 {
                push(FermionTerm::new(
                    vec![Ladder::create(p), Ladder::annihilate(q)],
                    Complex64::new(h, 0.0),
                ));
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            for r in 0..n {
                for s in 0..n {
                    if r == s {
                        continue;
                    }
                    let v = so.v(p, q, r, s);
                    if v != 0.0 {
                        push(FermionTerm::new(
                            vec![
                                Ladder::create(p),
                                Ladder::create(q),
                                Ladder::annihilate(s),
                                Ladder::annihilate(r),
                            ],
                            Complex64::new(0.25 * v, 0.0),
                        ));
                    }
                }
            }
        }
    }
    *acc.entry(PauliString::identity(n)).or_default() += so.e_core;
    PauliSum::from_terms(n, acc)
}

/// Total number operator `Σ_k a†_k a_k`.
pub fn number_operator(n_qubits: usize) -> PauliSum {
    let mut acc = PauliSum::zero(n_qubits);
    for k in 0..n_qubits {
        let t = FermionTerm::new(vec![Ladder::create(k), Ladder::annihilate(k)], Complex64::new(1.0, 0.0));
        acc = &acc + &jordan_wigner(&t, n_qubits).expect("in range");
    }
    acc
}

/// A product `a†_{c0} a†_{c1} … a_{a0} a_{a1} …` with unit coefficient.
///
/// Used both for manifold operators `Ĝ_I` and for the excitation part `T` of
/// ansatz generators `T - T†`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FermionExcitation {
    pub creators: Vec<usize>,
    pub annihilators: Vec<usize>,
}

impl FermionExcitation {
    pub fn new(creators: Vec<usize>, annihilators: Vec<usize>) -> Self {
        Self { creators, annihilators }
    }

    pub fn term(&self) -> FermionTerm {
        let ops = self
            .creators
            .iter()
            .map(|&c| Ladder::create(c))
            .chain(self.annihilators.iter().map(|&a| Ladder::annihilate(a)))
            .collect();
        FermionTerm::new(ops, Complex64::new(1.0, 0.0))
    }

    pub fn max_index(&self) -> usize {
        self.creators.iter().chain(&self.annihilators).copied().max().unwrap_or(0)
    }

    /// Change in particle number.
    pub fn particle_change(&self) -> i32 {
        self.creators.len() as i32 - self.annihilators.len() as i32
    }

    /// Change in twice the spin projection.
    pub fn sz2_change(&self) -> i32 {
        let s = |k: usize| if spin_of(k) == 0 { 1 } else { -1 };
        self.creators.iter().map(|&k| s(k)).sum::<i32>() - self.annihilators.iter().map(|&k| s(k)).sum::<i32>()
    }

    /// Jordan–Wigner image of the bare product.
    pub fn operator(&self, n_qubits: usize) -> Result<PauliSum, AlgebraError> {
        jordan_wigner(&self.term(), n_qubits)
    }

    /// Jordan–Wigner image of the anti-Hermitian generator `T - T†`.
    pub fn generator(&self, n_qubits: usize) -> Result<PauliSum, AlgebraError> {
        let t = self.term();
        let a = jordan_wigner(&t, n_qubits)?;
        let b = jordan_wigner(&t.dagger(), n_qubits)?;
        Ok(&a - &b)
    }

    pub fn descriptor(&self) -> String {
        let c: Vec<String> = self.creators.iter().map(|k| k.to_string()).collect();
        let a: Vec<String> = self.annihilators.iter().map(|k| k.to_string()).collect();
        format!("{}^{}", c.join(","), a.join(","))
    }

    pub fn parse_descriptor(s: &str) -> Result<Self, AlgebraError> {
        let (c, a) = s
            .split_once('^')
            .ok_or_else(|| AlgebraError::Parse(format!("bad excitation descriptor {s:?}")))?;
        let list = |t: &str| -> Result<Vec<usize>, AlgebraError> {
            t.split(',')
                .filter(|x| !x.is_empty())
                .map(|x| x.trim().parse().map_err(|_| AlgebraError::Parse(format!("bad index {x:?}"))))
                .collect()
        };
        Ok(Self::new(list(c)?, list(a)?))
    }
}

/// Manifold operator labels over a reference determinant: `i, j` occupied,
/// `a, b` unoccupied, with `i < j` and `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExcitationIndex {
    Ee1 { i: usize, a: usize },
    Ee2 { i: usize, j: usize, a: usize, b: usize },
    Ip1 { i: usize },
    Ip2 { i: usize, j: usize, a: usize },
    Ea1 { a: usize },
    Ea2 { i: usize, a: usize, b: usize },
}

impl ExcitationIndex {
    /// The bare operator `Ĝ_I`, e.g. `a†_a a†_b a_j a_i` for a double.
    pub fn excitation(&self) -> FermionExcitation {
        use ExcitationIndex::*;
        match *self {
            Ee1 { i, a } => FermionExcitation::new(vec![a], vec![i]),
            Ee2 { i, j, a, b } => FermionExcitation::new(vec![a, b], vec![j, i]),
            Ip1 { i } => FermionExcitation::new(vec![], vec![i]),
            Ip2 { i, j, a } => FermionExcitation::new(vec![a], vec![j, i]),
            Ea1 { a } => FermionExcitation::new(vec![a], vec![]),
            Ea2 { i, a, b } => FermionExcitation::new(vec![a, b], vec![i]),
        }
    }

    pub fn kind(&self) -> &'static str {
        use ExcitationIndex::*;
        match self {
            Ee1 { .. } => "EE1",
            Ee2 { .. } => "EE2",
            Ip1 { .. } => "IP1",
            Ip2 { .. } => "IP2",
            Ea1 { .. } => "EA1",
            Ea2 { .. } => "EA2",
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        use ExcitationIndex::*;
        match *self {
            Ee1 { i, a } => vec![i, a],
            Ee2 { i, j, a, b } => vec![i, j, a, b],
            Ip1 { i } => vec![i],
            Ip2 { i, j, a } => vec![i, j, a],
            Ea1 { a } => vec![a],
            Ea2 { i, a, b } => vec![i, a, b],
        }
    }

    pub fn is_single(&self) -> bool {
        matches!(self, Self::Ee1 { .. } | Self::Ip1 { .. } | Self::Ea1 { .. })
    }

    pub fn sz2_change(&self) -> i32 {
        self.excitation().sz2_change()
    }
}

/// Jordan–Wigner image of `Ĝ_I - Ĝ_I†`.
pub fn generator_for(x: &ExcitationIndex, n_qubits: usize) -> Result<PauliSum, AlgebraError> {
    x.excitation().generator(n_qubits)
}
