//! Helpers for 2x2 complex matrices.

use nalgebra::Matrix2;
use num_complex::Complex64;

pub type CMat2 = Matrix2<Complex64>;

pub fn czero() -> CMat2 {
    CMat2::zeros()
}

pub fn cident() -> CMat2 {
    CMat2::identity()
}

/// Pauli basis of the real vector space of 2x2 Hermitian matrices.
/// `pauli_basis(3)` returns s1..s3, `pauli_basis(4)` returns s1..s4 with
/// s4 the identity.
pub fn pauli_basis(dim: usize) -> Vec<CMat2> {
    assert!(dim == 3 || dim == 4, "dimension must be 3 or 4");
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut basis = vec![
        CMat2::new(o, l, l, o),
        CMat2::new(o, -i, i, o),
        CMat2::new(l, o, o, -l),
    ];
    if dim == 4 {
        basis.push(CMat2::new(l, o, o, l));
    }
    basis
}

pub fn pauli(j: usize, dim: usize) -> CMat2 {
    pauli_basis(dim)[j]
}

/// Matrix adjugation: [[a,b],[c,d]] -> [[d,-b],[-c,a]].
pub fn adjugate(m: &CMat2) -> CMat2 {
    CMat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

/// Frobenius norm of the anti-Hermitian part, |m - m*|.
pub fn hermitian_defect(m: &CMat2) -> f64 {
    (m - m.adjoint()).norm()
}

/// Coefficients of a Hermitian matrix in the Pauli basis:
/// h_j = Re tr(s^j m) / 2.
pub fn pauli_coefficients(m: &CMat2, dim: usize) -> Vec<f64> {
    pauli_basis(dim)
        .iter()
        .map(|s| ((s * m).trace() / 2.0).re)
        .collect()
}

/// Reassemble a Hermitian matrix from Pauli coefficients.
pub fn from_pauli_coefficients(coeffs: &[f64]) -> CMat2 {
    let basis = pauli_basis(coeffs.len());
    let mut m = czero();
    for (c, s) in coeffs.iter().zip(&basis) {
        m += s * Complex64::new(*c, 0.0);
    }
    m
}
