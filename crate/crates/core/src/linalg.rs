//! Small complex linear-algebra helpers shared across the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Kronecker product, row-major index convention: `(i*p+k, j*q+l)`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let (n, m) = (a.len(), b.len());
    CVector::from_fn(n * m, |idx, _| a[idx / m] * b[idx % m])
}

/// `|v><w|`
pub fn outer(v: &CVector, w: &CVector) -> CMatrix {
    v * w.adjoint()
}

pub fn basis_vector(dim: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[i] = Complex64::ONE;
    v
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation from the adjoint.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let eig = hermitize(m).symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| x.total_cmp(y));
    vals
}

/// (min, max) eigenvalue of a Hermitian matrix.
pub fn hermitian_eig_bounds(m: &CMatrix) -> (f64, f64) {
    let vals = hermitian_eigenvalues(m);
    (vals[0], *vals.last().unwrap())
}

/// Entrywise deviation of `u` from unitarity, `max |u†u - 1|`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - identity(n)))
}

/// `m^{-1/2}` for a Hermitian positive-definite matrix.
pub fn inv_sqrt(m: &CMatrix) -> CMatrix {
    let eig = hermitize(m).symmetric_eigen();
    let n = m.nrows();
    let mut d = CMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = Complex64::new(1.0 / eig.eigenvalues[i].max(1e-300).sqrt(), 0.0);
    }
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// k-fold Kronecker power.
pub fn kron_power(m: &CMatrix, k: usize) -> CMatrix {
    assert!(k >= 1);
    let mut out = m.clone();
    for _ in 1..k {
        out = kron(&out, m);
    }
    out
}

pub fn kron_power_vec(v: &CVector, k: usize) -> CVector {
    assert!(k >= 1);
    let mut out = v.clone();
    for _ in 1..k {
        out = kron_vec(&out, v);
    }
    out
}
