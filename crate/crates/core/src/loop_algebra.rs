//! Truncated matrix Laurent series ("loops") `λ ↦ Σ_{k=−N}^{N} c_k λ^k`.
//!
//! Coefficients are stored densely over `[−N, N]`. Binary operations
//! truncate to a target degree and accumulate the modulus of every dropped
//! coefficient in [`LoopMatrix::discarded_mass`].

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mat2::{self, Mat2};

/// Default truncation degree.
pub const DEFAULT_DEGREE: usize = 32;

/// Default absolute tolerance (max norm) for predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// `m`-th roots of unity `e^{2πij/m}`, `j = 0..m`.
pub fn roots_of_unity(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopMatrix {
    coeffs: Vec<Mat2>,
    degree: usize,
    radius: f64,
    discarded: f64,
}

impl LoopMatrix {
    pub fn zeros(degree: usize) -> Self {
        LoopMatrix {
            coeffs: vec![mat2::zero(); 2 * degree + 1],
            degree,
            radius: 1.0,
            discarded: 0.0,
        }
    }

    pub fn constant(m: Mat2, degree: usize) -> Self {
        let mut l = Self::zeros(degree);
        l.coeffs[degree] = m;
        l
    }

    pub fn identity(degree: usize) -> Self {
        Self::constant(mat2::identity(), degree)
    }

    /// Loop with the given `(k, c_k)` modes; the degree is the larger of
    /// `degree` and the largest `|k|`.
    pub fn from_modes(degree: usize, modes: &[(i64, Mat2)]) -> Self {
        let need = modes.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut l = Self::zeros(degree.max(need));
        for (k, m) in modes {
            *l.coeff_mut(*k) += m;
        }
        l
    }

    /// Builds a loop from a dense coefficient vector indexed `−N..=N`.
    pub fn from_coeffs(coeffs: Vec<Mat2>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::Argument(format!(
                "coefficient vector must have odd length 2N+1, got {}",
                coeffs.len()
            )));
        }
        let degree = coeffs.len() / 2;
        Ok(LoopMatrix { coeffs, degree, radius: 1.0, discarded: 0.0 })
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(Error::Argument(format!("radius {radius} not in (0, 1]")));
        }
        self.radius = radius;
        Ok(self)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Accumulated modulus of coefficients dropped by truncation.
    pub fn discarded_mass(&self) -> f64 {
        self.discarded
    }

    pub fn coeffs(&self) -> &[Mat2] {
        &self.coeffs
    }

    /// `c_k`, zero outside `[−N, N]`.
    pub fn coeff(&self, k: i64) -> Mat2 {
        if k.unsigned_abs() as usize > self.degree {
            mat2::zero()
        } else {
            self.coeffs[(k + self.degree as i64) as usize]
        }
    }

    /// Panics when `|k| > N`.
    pub fn coeff_mut(&mut self, k: i64) -> &mut Mat2 {
        assert!(k.unsigned_abs() as usize <= self.degree, "mode {k} outside degree {}", self.degree);
        let idx = (k + self.degree as i64) as usize;
        &mut self.coeffs[idx]
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, &Mat2)> + '_ {
        let n = self.degree as i64;
        self.coeffs.iter().enumerate().map(move |(i, m)| (i as i64 - n, m))
    }

    /// Σ_k ‖c_k‖∞, an upper bound for the max norm on the unit circle.
    pub fn coefficient_norm(&self) -> f64 {
        self.coeffs.iter().map(mat2::max_norm).sum()
    }

    /// Largest `|k|` with a coefficient above `tol`.
    pub fn effective_degree(&self, tol: f64) -> usize {
        self.modes()
            .filter(|(_, m)| mat2::max_norm(m) > tol)
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Re-expresses the loop at another degree, dropping (and recording)
    /// coefficients outside the new range.
    pub fn truncated(&self, degree: usize) -> LoopMatrix {
        let mut out = LoopMatrix::zeros(degree);
        out.radius = self.radius;
        out.discarded = self.discarded;
        for (k, m) in self.modes() {
            if k.unsigned_abs() as usize <= degree {
                *out.coeff_mut(k) = *m;
            } else {
                out.discarded += mat2::max_norm(m);
            }
        }
        out
    }

    /// `Σ c_k λ^k`.
    pub fn evaluate(&self, lambda: Complex64) -> Result<Mat2> {
        let n = self.degree;
        if lambda == Complex64::ZERO {
            if (1..=n).any(|k| mat2::max_norm(&self.coeff(-(k as i64))) != 0.0) {
                return Err(Error::Domain("evaluation at λ = 0 of a loop with a pole".into()));
            }
            return Ok(self.coeff(0));
        }
        // Horner in λ for k ≥ 0 and in λ⁻¹ for k < 0.
        let mut pos = mat2::zero();
        for k in (0..=n).rev() {
            pos = pos * lambda + self.coeffs[n + k];
        }
        let inv = lambda.inv();
        let mut neg = mat2::zero();
        for k in (1..=n).rev() {
            neg = (neg + self.coeffs[n - k]) * inv;
        }
        Ok(pos + neg)
    }

    /// Values at the `m`-th roots of unity.
    pub fn samples(&self, m: usize) -> Vec<Mat2> {
        let n = self.degree;
        if m < 2 * n + 1 {
            return roots_of_unity(m)
                .into_iter()
                .map(|l| self.evaluate(l).expect("nonzero sample point"))
                .collect();
        }
        let fft = fft_plan(m, true);
        let mut out = vec![mat2::zero(); m];
        let mut buf = vec![Complex64::ZERO; m];
        for (r, col) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            buf.iter_mut().for_each(|z| *z = Complex64::ZERO);
            for (k, c) in self.modes() {
                buf[k.rem_euclid(m as i64) as usize] += c[(r, col)];
            }
            fft.process(&mut buf);
            for (o, z) in out.iter_mut().zip(buf.iter()) {
                o[(r, col)] = *z;
            }
        }
        out
    }

    /// Discrete Fourier analysis of values at the `M`-th roots of unity,
    /// re-indexed to `[−N, N]`. Exact for loops of degree `≤ N` when
    /// `M ≥ 2N + 2`.
    pub fn from_samples(values: &[Mat2], degree: usize) -> Result<LoopMatrix> {
        let m = values.len();
        if m < 2 * degree + 2 {
            return Err(Error::Argument(format!(
                "{m} samples cannot resolve degree {degree}; need at least {}",
                2 * degree + 2
            )));
        }
        let fft = fft_plan(m, false);
        let mut out = LoopMatrix::zeros(degree);
        let mut buf = vec![Complex64::ZERO; m];
        let scale = 1.0 / m as f64;
        for (r, col) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            for (b, v) in buf.iter_mut().zip(values) {
                *b = v[(r, col)];
            }
            fft.process(&mut buf);
            for k in -(degree as i64)..=(degree as i64) {
                out.coeff_mut(k)[(r, col)] = buf[k.rem_euclid(m as i64) as usize] * scale;
            }
        }
        Ok(out)
    }

    /// Samples `f` at `m` roots of unity and Fourier-analyses to degree `N`.
    pub fn from_fn<F: Fn(Complex64) -> Mat2>(f: F, m: usize, degree: usize) -> Result<LoopMatrix> {
        let values: Vec<Mat2> = roots_of_unity(m).into_iter().map(f).collect();
        Self::from_samples(&values, degree)
    }

    /// Cauchy product truncated to the larger of the input degrees.
    pub fn multiply(&self, other: &LoopMatrix) -> Result<LoopMatrix> {
        self.multiply_to_degree(other, self.degree.max(other.degree))
    }

    /// Cauchy product `Σ_j a_j b_{k−j}` truncated to `[−degree, degree]`.
    pub fn multiply_to_degree(&self, other: &LoopMatrix, degree: usize) -> Result<LoopMatrix> {
        if self.radius != other.radius {
            return Err(Error::Argument(format!(
                "radius mismatch in loop product: {} vs {}",
                self.radius, other.radius
            )));
        }
        let mut out = LoopMatrix::zeros(degree);
        out.radius = self.radius;
        out.discarded = self.discarded + other.discarded;
        let d = degree as i64;
        let na = self.degree as i64;
        let nb = other.degree as i64;
        let mut dropped = vec![0.0; 0];
        let full = na + nb;
        if full > d {
            dropped = vec![0.0; (2 * full + 1) as usize];
        }
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.iter().all(|z| *z == Complex64::ZERO) {
                continue;
            }
            let ka = i as i64 - na;
            for (j, b) in other.coeffs.iter().enumerate() {
                let k = ka + j as i64 - nb;
                if k.abs() <= d {
                    out.coeffs[(k + d) as usize] += a * b;
                } else {
                    let slot = &mut dropped[(k + full) as usize];
                    *slot += mat2::max_norm(&(a * b));
                }
            }
        }
        out.discarded += dropped.iter().sum::<f64>();
        Ok(out)
    }

    /// `d/dλ` of the series. The result has degree `N + 1` so that the
    /// `λ^{−N−1}` term is kept.
    pub fn lambda_derivative(&self) -> LoopMatrix {
        let n = self.degree as i64;
        let mut out = LoopMatrix::zeros(self.degree + 1);
        out.radius = self.radius;
        out.discarded = self.discarded;
        for k in -(n + 1)..n {
            let src = self.coeff(k + 1);
            *out.coeff_mut(k) = mat2::scale(&src, Complex64::from((k + 1) as f64));
        }
        out
    }

    /// `λ ↦ L(1/λ̄)*`: coefficient `k` is the conjugate transpose of `c_{−k}`.
    pub fn star(&self) -> LoopMatrix {
        let mut out = self.clone();
        let n = self.degree;
        for i in 0..out.coeffs.len() {
            out.coeffs[i] = self.coeffs[2 * n - i].adjoint();
        }
        out
    }

    /// Coefficient-wise adjugate; the inverse loop when `det L ≡ 1`.
    pub fn adjugate(&self) -> LoopMatrix {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|m| *m = mat2::adjugate(m));
        out
    }

    /// `C L D`, constant matrices on both sides.
    pub fn sandwich(&self, left: &Mat2, right: &Mat2) -> LoopMatrix {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|m| *m = left * *m * right);
        out
    }

    pub fn scaled(&self, s: Complex64) -> LoopMatrix {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|m| *m *= s);
        out
    }

    /// Sum with the other loop, at the larger of the two degrees.
    pub fn add(&self, other: &LoopMatrix) -> LoopMatrix {
        let degree = self.degree.max(other.degree);
        let mut out = self.truncated(degree);
        out.discarded += other.discarded;
        for (k, m) in other.modes() {
            *out.coeff_mut(k) += m;
        }
        out
    }

    pub fn sub(&self, other: &LoopMatrix) -> LoopMatrix {
        self.add(&other.scaled(Complex64::from(-1.0)))
    }

    /// Largest coefficient difference in max norm.
    pub fn coeff_distance(&self, other: &LoopMatrix) -> f64 {
        let n = self.degree.max(other.degree) as i64;
        (-n..=n)
            .map(|k| mat2::max_norm(&(self.coeff(k) - other.coeff(k))))
            .fold(0.0, f64::max)
    }

    /// Largest pointwise difference over `samples` roots of unity.
    pub fn circle_distance(&self, other: &LoopMatrix, samples: usize) -> f64 {
        self.samples(samples)
            .iter()
            .zip(other.samples(samples).iter())
            .map(|(a, b)| mat2::max_norm(&(a - b)))
            .fold(0.0, f64::max)
    }

    /// Invariance under `g(λ) ↦ σ g(−λ) σ⁻¹`: diagonal entries carry only
    /// even modes and off-diagonal entries only odd modes.
    pub fn is_twisted(&self, tol: f64) -> bool {
        self.twist_defect() <= tol
    }

    /// Largest coefficient violating the twist parity.
    pub fn twist_defect(&self) -> f64 {
        self.modes()
            .map(|(k, m)| {
                let (a, b) = if k.rem_euclid(2) == 0 {
                    (m[(0, 1)], m[(1, 0)])
                } else {
                    (m[(0, 0)], m[(1, 1)])
                };
                a.norm().max(b.norm())
            })
            .fold(0.0, f64::max)
    }

    /// Unitary with determinant one at each of `samples` roots of unity.
    pub fn is_unitary_on_circle(&self, samples: usize, tol: f64) -> bool {
        self.unitarity_defect(samples) <= tol
    }

    /// `max_j max(‖L*L − Id‖∞, |det L − 1|)` over `samples` roots of unity.
    pub fn unitarity_defect(&self, samples: usize) -> f64 {
        self.samples(samples)
            .iter()
            .map(|m| {
                let u = mat2::max_norm(&(m.adjoint() * m - mat2::identity()));
                u.max((m.determinant() - 1.0).norm())
            })
            .fold(0.0, f64::max)
    }

    /// `max_j |det L(λ_j) − 1|` over `samples` roots of unity.
    pub fn determinant_defect(&self, samples: usize) -> f64 {
        self.samples(samples)
            .iter()
            .map(|m| (m.determinant() - 1.0).norm())
            .fold(0.0, f64::max)
    }

    /// Membership in `Λ⁺SL(2,ℂ)_σ`: no negative modes, determinant one on the
    /// circle, and `L(0) ∈ K = {diag[a, 1/a] : a > 0}`.
    pub fn is_positive_loop(&self, tol: f64) -> bool {
        let n = self.degree as i64;
        if (-n..0).any(|k| mat2::max_norm(&self.coeff(k)) > tol) {
            return false;
        }
        let c0 = self.coeff(0);
        let offdiag = c0[(0, 1)].norm().max(c0[(1, 0)].norm());
        let imag = c0[(0, 0)].im.abs().max(c0[(1, 1)].im.abs());
        if offdiag > tol || imag > tol || c0[(0, 0)].re <= 0.0 || c0[(1, 1)].re <= 0.0 {
            return false;
        }
        if (c0.determinant() - 1.0).norm() > tol {
            return false;
        }
        self.determinant_defect(self.default_sample_count()) <= tol
    }

    /// Sample count resolving this loop's degree with headroom.
    pub fn default_sample_count(&self) -> usize {
        (4 * self.degree + 4).max(64)
    }
}

/// Wire form of the debug dump: each mode `k` with its 2×2 entries as
/// `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct LoopDump {
    degree: usize,
    radius: f64,
    coefficients: Vec<ModeDump>,
}

#[derive(Serialize, Deserialize)]
struct ModeDump {
    k: i64,
    entries: [[[f64; 2]; 2]; 2],
}

impl Serialize for LoopMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let coefficients = self
            .modes()
            .map(|(k, m)| {
                let e = |r: usize, c: usize| [m[(r, c)].re, m[(r, c)].im];
                ModeDump { k, entries: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
            })
            .collect();
        LoopDump { degree: self.degree, radius: self.radius, coefficients }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LoopMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dump = LoopDump::deserialize(d)?;
        let mut l = LoopMatrix::zeros(dump.degree);
        l.radius = dump.radius;
        for mode in dump.coefficients {
            if mode.k.unsigned_abs() as usize > dump.degree {
                return Err(serde::de::Error::custom(format!(
                    "mode {} outside degree {}",
                    mode.k, dump.degree
                )));
            }
            let e = |r: usize, c: usize| Complex64::new(mode.entries[r][c][0], mode.entries[r][c][1]);
            *l.coeff_mut(mode.k) = mat2::mat(e(0, 0), e(0, 1), e(1, 0), e(1, 1));
        }
        Ok(l)
    }
}
