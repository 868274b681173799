//! Small dense complex linear-algebra helpers shared by the other modules.

use nalgebra::{DMatrix, DVector, Matrix4, SymmetricEigen};

use crate::C64;

pub type Mat4 = Matrix4<C64>;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Largest entry of `|A - A†|`.
pub fn hermitian_deviation(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(A + A†) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix. Only the lower triangle is
/// trusted, so the input is symmetrised first.
pub fn eigh(a: &CMat) -> (DVector<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(a));
    (eig.eigenvalues, eig.eigenvectors)
}

pub fn eigvalsh(a: &CMat) -> DVector<f64> {
    SymmetricEigen::new(hermitian_part(a)).eigenvalues
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    eigvalsh(a).iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max_eigenvalue(a: &CMat) -> f64 {
    eigvalsh(a).iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `V f(D) V†` for a Hermitian matrix with spectrum `D`.
pub fn hermitian_map(a: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(a);
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let fv = f(v);
        for x in scaled.column_mut(j).iter_mut() {
            *x *= fv;
        }
    }
    scaled * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix; negative rounding noise
/// in the spectrum is clipped to zero.
pub fn sqrt_psd(a: &CMat) -> CMat {
    hermitian_map(a, |v| v.max(0.0).sqrt())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn to_dynamic(m: &Mat4) -> CMat {
    CMat::from_fn(4, 4, |i, j| m[(i, j)])
}

/// Row-major vectorisation: entry `a * cols + i` holds `M[(a, i)]`.
///
/// With this ordering `vec(K) vec(K)†` is the Choi matrix of `ρ ↦ KρK†`
/// under `J = Σ_ij E(|i⟩⟨j|) ⊗ |i⟩⟨j|` (output factor first).
pub fn vec_rows(m: &CMat) -> DVector<C64> {
    let (r, c) = m.shape();
    DVector::from_fn(r * c, |k, _| m[(k / c, k % c)])
}

/// Largest entrywise distance between two matrices of equal shape.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest absolute entry of a matrix, a cheap proxy for `‖·‖∞` checks.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}
