//! Dense eigensolvers on complex matrices.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest element-wise modulus of `m − m†`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Rotates `v` so its largest-modulus component (first on ties) is real
/// and positive.
pub fn fix_phase(v: &mut CVector) {
    let mut best = 0;
    for k in 0..v.len() {
        if v[k].norm() > v[best].norm() + 1e-12 {
            best = k;
        }
    }
    if v.is_empty() || v[best].norm() == 0.0 {
        return;
    }
    let ph = v[best].conj() / v[best].norm();
    *v *= ph;
}

fn lex_cmp(a: &CVector, b: &CVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let c = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if c != Ordering::Equal {
            return c;
        }
    }
    Ordering::Equal
}

/// Sorts `(value, vector)` pairs ascending; values within `tol` of the start
/// of their run are ordered by lexicographic comparison of the vectors.
pub fn sort_roots(roots: &mut [(f64, CVector)], tol: f64) {
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut start = 0;
    while start < roots.len() {
        let mut end = start + 1;
        while end < roots.len() && roots[end].0 - roots[start].0 < tol {
            end += 1;
        }
        roots[start..end].sort_by(|a, b| lex_cmp(&a.1, &b.1));
        start = end;
    }
}

/// Eigen-decomposition of a Hermitian matrix, ascending, phase-fixed vectors.
pub fn hermitian_eigh(m: &CMatrix) -> Vec<(f64, CVector)> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let eig = hermitize(m).symmetric_eigen();
    let mut roots: Vec<(f64, CVector)> = (0..m.nrows())
        .map(|k| {
            let mut v: CVector = eig.eigenvectors.column(k).into_owned();
            fix_phase(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();
    sort_roots(&mut roots, 1e-10);
    roots
}

/// Eigenvalues and right eigenvectors of a general complex matrix via the
/// complex Schur form `m = Q T Q†` and back-substitution on `T`.
pub fn general_eig(m: &CMatrix) -> Vec<(Complex64, CVector)> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let (q, t) = m.clone().schur().unpack();
    let scale = t.iter().fold(0.0f64, |a, x| a.max(x.norm())).max(1.0);
    let tiny = f64::EPSILON * scale;
    (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            let mut y = CVector::zeros(n);
            y[k] = Complex64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut acc = Complex64::default();
                for j in i + 1..=k {
                    acc += t[(i, j)] * y[j];
                }
                let mut d = t[(i, i)] - lambda;
                if d.norm() < tiny {
                    d = Complex64::new(tiny, 0.0);
                }
                y[i] = -acc / d;
            }
            let mut x = &q * y;
            let nrm = x.norm();
            x /= Complex64::new(nrm, 0.0);
            (lambda, x)
        })
        .collect()
}

/// `X = U_k Λ_k^{-1/2}` over overlap eigenvalues above `threshold`, and the
/// number of discarded directions.
pub fn canonical_orthogonalizer(s: &CMatrix, threshold: f64) -> (CMatrix, usize) {
    let n = s.nrows();
    let eig = hermitize(s).symmetric_eigen();
    let kept: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > threshold).collect();
    let mut x = CMatrix::zeros(n, kept.len());
    for (c, &k) in kept.iter().enumerate() {
        let f = Complex64::new(1.0 / eig.eigenvalues[k].sqrt(), 0.0);
        x.set_column(c, &(eig.eigenvectors.column(k) * f));
    }
    (x, n - kept.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn general_eig_residuals_are_small() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[c(1.0, 0.5), c(2.0, 0.0), c(0.0, -1.0), c(0.3, 0.0), c(-1.0, 0.0), c(0.5, 0.5), c(0.0, 0.0), c(1.5, 0.0), c(2.0, -0.2)],
        );
        for (l, x) in general_eig(&m) {
            let r = &m * &x - &x * l;
            assert!(r.norm() < 1e-12, "residual {}", r.norm());
        }
    }

    #[test]
    fn general_eig_of_triangular_defective_block() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let roots = general_eig(&m);
        assert!(roots.iter().all(|(l, _)| (l - c(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn hermitian_eigh_is_sorted_and_phase_fixed() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let roots = hermitian_eigh(&m);
        assert!((roots[0].0 - 1.0).abs() < 1e-12 && (roots[1].0 - 3.0).abs() < 1e-12);
        // Equal moduli: the first component is the one made real.
        for (_, v) in &roots {
            assert!(v[0].im.abs() < 1e-12 && v[0].re > 0.0);
        }
    }

    #[test]
    fn orthogonalizer_drops_null_directions() {
        let s = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let (x, dropped) = canonical_orthogonalizer(&s, 1e-10);
        assert_eq!(dropped, 1);
        let id = x.adjoint() * &s * &x;
        assert!((id[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
    }
}
