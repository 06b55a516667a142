//! Small helpers for 2×2 complex matrices.

use nalgebra::Matrix2;
use num_complex::Complex64;

pub type Mat2 = Matrix2<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn mat(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Mat2 {
    Mat2::new(a, b, c, d)
}

/// `diag[u, v]`
#[inline]
pub fn diag(u: Complex64, v: Complex64) -> Mat2 {
    Mat2::new(u, Complex64::ZERO, Complex64::ZERO, v)
}

/// `off[u, v]`: `u` upper right, `v` lower left.
#[inline]
pub fn off(u: Complex64, v: Complex64) -> Mat2 {
    Mat2::new(Complex64::ZERO, u, v, Complex64::ZERO)
}

#[inline]
pub fn identity() -> Mat2 {
    Mat2::identity()
}

#[inline]
pub fn zero() -> Mat2 {
    Mat2::zeros()
}

/// `σ = diag[1, −1]`
#[inline]
pub fn sigma() -> Mat2 {
    diag(c(1.0, 0.0), c(-1.0, 0.0))
}

/// Largest entry modulus.
/// `||z| − 1| ≤ tol`; false for NaN.
pub fn on_unit_circle(z: Complex64, tol: f64) -> bool {
    (z.norm() - 1.0).abs() <= tol
}

#[inline]
pub fn max_norm(m: &Mat2) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

#[inline]
pub fn scale(m: &Mat2, s: Complex64) -> Mat2 {
    m.map(|z| z * s)
}

/// Adjugate; the inverse for matrices of determinant one.
#[inline]
pub fn adjugate(m: &Mat2) -> Mat2 {
    Mat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

/// Inverse via the adjugate, `None` when the determinant underflows.
pub fn inverse(m: &Mat2) -> Option<Mat2> {
    let det = m.determinant();
    if det.norm() <= f64::MIN_POSITIVE * 1e3 || !det.is_finite() {
        return None;
    }
    Some(scale(&adjugate(m), det.inv()))
}

/// Matrix exponential of an arbitrary 2×2 matrix.
///
/// Writes `A = (tr A / 2) I + A₀` with `A₀` trace free; then
/// `exp(A₀) = cosh(s) I + sinh(s)/s · A₀` with `s² = −det A₀`. Both
/// `cosh` and `sinh(s)/s` are even in `s`, so the square-root branch is
/// irrelevant.
pub fn expm(a: &Mat2) -> Mat2 {
    let half_trace = (a[(0, 0)] + a[(1, 1)]) * 0.5;
    let a0 = a - Mat2::identity() * half_trace;
    let s2 = -a0.determinant();
    let s = s2.sqrt();
    let (ch, shc) = if s.norm() < 1e-4 {
        // Taylor tails; the first omitted terms are O(s^8).
        let s4 = s2 * s2;
        (
            1.0 + s2 / 2.0 + s4 / 24.0 + s4 * s2 / 720.0,
            1.0 + s2 / 6.0 + s4 / 120.0 + s4 * s2 / 5040.0,
        )
    } else {
        (s.cosh(), s.sinh() / s)
    };
    let e = Mat2::identity() * ch + a0 * shc;
    e * half_trace.exp()
}

/// Whether `m` is anti-hermitian and trace free to `tol` in max norm.
pub fn is_su2_algebra(m: &Mat2, tol: f64) -> bool {
    max_norm(&(m + m.adjoint())) <= tol && (m[(0, 0)] + m[(1, 1)]).norm() <= tol
}

/// `‖m*m − Id‖∞ ≤ tol` and `|det m − 1| ≤ tol`.
pub fn is_special_unitary(m: &Mat2, tol: f64) -> bool {
    max_norm(&(m.adjoint() * m - Mat2::identity())) <= tol && (m.determinant() - 1.0).norm() <= tol
}
