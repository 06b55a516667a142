//! The identification su(2) ≅ ℝ³ in the basis
//!
//! ```text
//! e₁ = [[i, 0], [0, −i]],  e₂ = [[0, 1], [−1, 0]],  e₃ = [[0, i], [i, 0]]
//! ```
//!
//! so that `x₁e₁ + x₂e₂ + x₃e₃ = [[i x₁, x₂ + i x₃], [−x₂ + i x₃, −i x₁]]` and
//! the determinant of the matrix form is the squared Euclidean norm.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::{self, c, Mat2};

pub fn e1() -> Mat2 {
    mat2::diag(c(0.0, 1.0), c(0.0, -1.0))
}

pub fn e2() -> Mat2 {
    mat2::off(c(1.0, 0.0), c(-1.0, 0.0))
}

pub fn e3() -> Mat2 {
    mat2::off(c(0.0, 1.0), c(0.0, 1.0))
}

/// A point or vector of ℝ³, stored in the e₁, e₂, e₃ coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SU2Vector(pub [f64; 3]);

impl SU2Vector {
    pub const ZERO: SU2Vector = SU2Vector([0.0; 3]);

    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        SU2Vector([x1, x2, x3])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }
    pub fn y(&self) -> f64 {
        self.0[1]
    }
    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn to_matrix(&self) -> Mat2 {
        let [x1, x2, x3] = self.0;
        mat2::mat(c(0.0, x1), c(x2, x3), c(-x2, x3), c(0.0, -x1))
    }

    /// Reads coordinates off a matrix without checking membership in su(2);
    /// the hermitian and trace parts are discarded.
    pub fn from_matrix_unchecked(m: &Mat2) -> Self {
        let upper = (m[(0, 1)] - m[(1, 0)].conj()) * 0.5;
        let diag = (m[(0, 0)] - m[(1, 1)]) * 0.5;
        SU2Vector([diag.im, upper.re, upper.im])
    }

    /// Converts a trace-free anti-hermitian matrix, failing when `m` is
    /// further than `tol` (max norm) from su(2).
    pub fn from_matrix(m: &Mat2, tol: f64) -> Result<Self> {
        if !mat2::is_su2_algebra(m, tol) {
            return Err(Error::Domain(format!(
                "matrix is not trace-free anti-hermitian to {tol:.1e}: {m:?}"
            )));
        }
        Ok(Self::from_matrix_unchecked(m))
    }

    pub fn dot(&self, other: &SU2Vector) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn cross(&self, o: &SU2Vector) -> SU2Vector {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = o.0;
        SU2Vector([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(&self) -> Option<SU2Vector> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| *self * (1.0 / n))
    }

    pub fn distance(&self, other: &SU2Vector) -> f64 {
        (*self - *other).norm()
    }

    pub fn max_abs_diff(&self, other: &SU2Vector) -> f64 {
        (0..3).fold(0.0_f64, |m, k| m.max((self.0[k] - other.0[k]).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// The rotation `X ↦ C X C⁻¹` for `C ∈ SU(2)`.
    pub fn conjugated(&self, by: &Mat2) -> SU2Vector {
        let inv = mat2::adjugate(by);
        SU2Vector::from_matrix_unchecked(&(by * self.to_matrix() * inv))
    }

    /// Rotation by π about the e₁ axis, i.e. conjugation by e₁.
    pub fn rotated_about_e1(&self) -> SU2Vector {
        SU2Vector([self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Add for SU2Vector {
    type Output = SU2Vector;
    fn add(self, o: SU2Vector) -> SU2Vector {
        SU2Vector([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for SU2Vector {
    type Output = SU2Vector;
    fn sub(self, o: SU2Vector) -> SU2Vector {
        SU2Vector([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for SU2Vector {
    type Output = SU2Vector;
    fn neg(self) -> SU2Vector {
        SU2Vector([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for SU2Vector {
    type Output = SU2Vector;
    fn mul(self, s: f64) -> SU2Vector {
        SU2Vector([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basis_vectors() {
        assert_eq!(SU2Vector::from_matrix(&e1(), 0.0).unwrap(), SU2Vector::new(1.0, 0.0, 0.0));
        assert_eq!(SU2Vector::from_matrix(&e2(), 0.0).unwrap(), SU2Vector::new(0.0, 1.0, 0.0));
        assert_eq!(SU2Vector::from_matrix(&e3(), 0.0).unwrap(), SU2Vector::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn rejects_hermitian_matrix() {
        assert!(SU2Vector::from_matrix(&mat2::sigma(), 1e-9).is_err());
    }

    #[test]
    fn e1_conjugation_is_half_turn() {
        let v = SU2Vector::new(0.3, -1.2, 2.5);
        let w = v.conjugated(&e1());
        assert!(w.max_abs_diff(&v.rotated_about_e1()) < 1e-15);
    }

    proptest! {
        #[test]
        fn matrix_round_trip(x1 in -10.0..10.0f64, x2 in -10.0..10.0f64, x3 in -10.0..10.0f64) {
            let v = SU2Vector::new(x1, x2, x3);
            let m = v.to_matrix();
            prop_assert_eq!(SU2Vector::from_matrix(&m, 0.0).unwrap(), v);
            let det = m.determinant();
            prop_assert!((det.re - v.dot(&v)).abs() <= 1e-12 * (1.0 + v.dot(&v)));
            prop_assert!(det.im.abs() <= 1e-12);
        }
    }
}
