//! Dense complex linear algebra helpers and Haar sampling.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Standard complex Gaussian, `E|z|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows x cols` matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    // Fill column-major explicitly so the draw order is fixed.
    let mut m = CMat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// First `n` columns of a Haar unitary on `U(m)`.
///
/// Thin QR of an `m x n` Ginibre matrix with every column of `Q` rotated by
/// the phase of the matching diagonal entry of `R`, which makes the
/// factorization unique (positive diagonal of `R`) and `Q` Haar on the
/// Stiefel manifold.
pub fn haar_stiefel<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> CMat {
    assert!(n <= m, "Stiefel frame needs n <= m");
    let g = ginibre(rng, m, n);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let rkk = r[(k, k)];
        let norm = rkk.norm();
        let phase = if norm > 0.0 { rkk / norm } else { c(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Haar-random element of `U(n)`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    haar_stiefel(rng, n, n)
}

/// Haar-random element of `SU(n)`.
pub fn haar_special_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let mut u = haar_unitary(rng, n);
    let det = u.determinant();
    let fix = (det / det.norm()).powf(1.0 / n as f64).conj();
    u *= fix;
    u
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint()
}

/// Entrywise complex conjugate.
pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

pub fn spectral_norm_real(m: &RMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

pub fn det(m: &CMat) -> Complex64 {
    m.determinant()
}

/// Inverse by LU; singular input is reported, not unwrapped.
pub fn inverse(m: &CMat, what: &str) -> Result<CMat> {
    m.clone().try_inverse().ok_or_else(|| Error::Singular(what.to_string()))
}

/// Whether `u` is unitary to `tol` in operator norm.
pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    u.is_square() && spectral_norm(&(u.adjoint() * u - identity(u.nrows()))) <= tol
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(m.nrows(), m.ncols());
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// `½ tr|A|` for Hermitian `A` (the halved trace norm used throughout).
pub fn half_trace_norm(a: &CMat) -> f64 {
    let (vals, _) = hermitian_eigen(a);
    0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn psd_sqrt(a: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigen(a);
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&v| c(v.max(0.0).sqrt(), 0.0)));
    &vecs * DMatrix::from_diagonal(&d) * vecs.adjoint()
}

/// Eigenvalues of a general complex square matrix.
pub fn eigenvalues(m: &CMat) -> Vec<Complex64> {
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff_real(a: &RMat, b: &RMat) -> f64 {
    (a - b).iter().map(|z| z.abs()).fold(0.0, f64::max)
}
