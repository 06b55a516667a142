//! Iwasawa splitting `g = F·B` of a twisted loop on the unit circle into a
//! factor `F` unitary on the circle and a positive factor `B` (holomorphic
//! on the disk, `B(0) = diag[ρ, 1/ρ]`, `ρ > 0`).
//!
//! With `h = g*g` the positive factor solves `B*B = h`. Writing `X = B⁻¹`,
//! the identity `hX = B*` has no positive modes, which gives the block
//! Toeplitz system
//!
//! ```text
//! Σ_{j=0}^{n} h_{k−j} X_j = δ_{k0} B_0*,   k = 0..n
//! ```
//!
//! on growing finite sections. The sections are solved by the block
//! Levinson–Whittle recursion, which produces the solution of every section
//! size on the way (it is the triangular factorization of the inverse
//! Toeplitz matrix). The section order is doubled until the normalized
//! solution stabilizes. Then `F = gX` and `B = (P_{≤0}(hX))*`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::loop_algebra::LoopMatrix;
use crate::mat2::{self, Mat2};

#[derive(Clone, Debug)]
pub struct IwasawaFactors {
    /// Unitary factor `F`.
    pub unitary: LoopMatrix,
    /// Positive factor `B`.
    pub positive: LoopMatrix,
    /// `max ‖g − F·B‖∞` over the circle samples.
    pub residual: f64,
    /// Finite-section order at which the factor stabilized.
    pub section_order: usize,
}

impl IwasawaFactors {
    /// `ρ` in `B(0) = diag[ρ, 1/ρ]`.
    pub fn rho(&self) -> f64 {
        self.positive.coeff(0)[(0, 0)].re
    }
}

/// Result of factoring a positive loop `h = B*·B`.
#[derive(Clone, Debug)]
pub struct SpectralFactor {
    /// `B`, positive.
    pub factor: LoopMatrix,
    /// `B⁻¹`, the finite-section solution.
    pub inverse: LoopMatrix,
    pub section_order: usize,
    /// Change of the normalized solution between the last two section sizes.
    pub last_change: f64,
}

const FIRST_CHECKPOINT: usize = 4;

/// Factors a hermitian positive-definite twisted loop as `h = B*·B` with `B`
/// positive.
pub fn spectral_factorize_positive(h: &LoopMatrix, degree: usize, tol: f64) -> Result<LoopMatrix> {
    let sf = spectral_factor(h, degree, tol)?;
    let check = sf.factor.star().multiply_to_degree(&sf.factor, h.degree())?;
    let residual = check.circle_distance(h, h.default_sample_count());
    if residual > tol {
        return Err(Error::Truncation { residual, tol, degree });
    }
    Ok(sf.factor)
}

/// Finite-section spectral factorization; see the module docs.
pub fn spectral_factor(h: &LoopMatrix, degree: usize, tol: f64) -> Result<SpectralFactor> {
    validate_positive_definite(h)?;
    let scale = h.coeff(0).iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    if !h.is_twisted(1e-10 * scale) {
        return Err(Error::Domain(format!(
            "loop is not twisted (parity defect {:.3e})",
            h.twist_defect()
        )));
    }

    let cap = (16 * degree).max(FIRST_CHECKPOINT);
    let d = h.degree() as i64;
    let hk = |k: i64| -> Mat2 {
        if k.abs() > d {
            mat2::zero()
        } else {
            h.coeff(k)
        }
    };

    // Forward (A) and backward (C) predictors of the current section.
    let mut fwd: Vec<Mat2> = vec![mat2::identity()];
    let mut bwd: Vec<Mat2> = vec![mat2::identity()];
    let mut v = hk(0);
    let mut w = hk(0);
    let mut previous: Option<Vec<Mat2>> = None;
    let mut checkpoint = FIRST_CHECKPOINT.min(cap);
    let mut last_change = f64::INFINITY;

    for m in 0..cap {
        // Mismatch of the zero-padded predictors against the next row.
        let lo = (m as i64 + 1 - d).max(0) as usize;
        let mut delta = mat2::zero();
        for (j, a) in fwd.iter().enumerate().skip(lo) {
            delta += hk(m as i64 + 1 - j as i64) * a;
        }
        let mut gamma = mat2::zero();
        for (j, cb) in bwd.iter().enumerate().take(d as usize) {
            gamma += hk(-(j as i64 + 1)) * cb;
        }
        let w_inv = mat2::inverse(&w)
            .ok_or_else(|| Error::Domain("Toeplitz section became singular".into()))?;
        let v_inv = mat2::inverse(&v)
            .ok_or_else(|| Error::Domain("Toeplitz section became singular".into()))?;
        let kf = w_inv * delta;
        let kb = v_inv * gamma;

        let mut next_fwd = Vec::with_capacity(m + 2);
        let mut next_bwd = Vec::with_capacity(m + 2);
        for j in 0..=m + 1 {
            let a = if j <= m { fwd[j] } else { mat2::zero() };
            let cs = if j >= 1 { bwd[j - 1] } else { mat2::zero() };
            next_fwd.push(a - cs * kf);
            next_bwd.push(cs - a * kb);
        }
        let v_next = v - gamma * kf;
        let w_next = w - delta * kb;
        fwd = next_fwd;
        bwd = next_bwd;
        v = v_next;
        w = w_next;

        let order = m + 1;
        if order == checkpoint || order == cap {
            let x = normalized_solution(&fwd, &v)?;
            if let Some(prev) = &previous {
                last_change = (0..x.len())
                    .map(|j| {
                        let p = prev.get(j).copied().unwrap_or_else(mat2::zero);
                        mat2::max_norm(&(x[j] - p))
                    })
                    .sum();
                if last_change < tol / 10.0 {
                    return Ok(assemble(h, x, degree, order, last_change));
                }
            }
            previous = Some(x);
            checkpoint *= 2;
        }
    }
    let x = previous.expect("at least one checkpoint");
    let order = x.len() - 1;
    let sf = assemble(h, x, degree, order, last_change);
    let check = sf.factor.star().multiply_to_degree(&sf.factor, h.degree())?;
    let residual = check.circle_distance(h, h.default_sample_count());
    Err(Error::Truncation { residual, tol, degree })
}

/// `X = A·V^{−1/2}` with the diagonal square root fixing `X_0 > 0` in K.
fn normalized_solution(fwd: &[Mat2], v: &Mat2) -> Result<Vec<Mat2>> {
    let v11 = v[(0, 0)].re;
    let v22 = v[(1, 1)].re;
    if !(v11 > 0.0 && v22 > 0.0) {
        return Err(Error::Domain("innovation matrix is not positive".into()));
    }
    let inv_sqrt = mat2::diag(Complex64::from(v11.sqrt().recip()), Complex64::from(v22.sqrt().recip()));
    Ok(fwd.iter().map(|a| a * inv_sqrt).collect())
}

fn assemble(h: &LoopMatrix, x: Vec<Mat2>, degree: usize, order: usize, last_change: f64) -> SpectralFactor {
    let n = x.len() - 1;
    let mut inverse = LoopMatrix::zeros(n.max(degree));
    for (k, m) in x.iter().enumerate() {
        *inverse.coeff_mut(k as i64) = *m;
    }
    // B_k = (Σ_j h_{−k−j} X_j)*.
    let d = h.degree() as i64;
    let mut factor = LoopMatrix::zeros(degree);
    for k in 0..=degree as i64 {
        let mut y = mat2::zero();
        for (j, xj) in x.iter().enumerate() {
            let idx = -k - j as i64;
            if idx < -d {
                break;
            }
            y += h.coeff(idx) * xj;
        }
        *factor.coeff_mut(k) = y.adjoint();
    }
    SpectralFactor { factor, inverse, section_order: order, last_change }
}

fn validate_positive_definite(h: &LoopMatrix) -> Result<()> {
    let m = h.default_sample_count();
    let lambdas = crate::loop_algebra::roots_of_unity(m);
    for (j, s) in h.samples(m).iter().enumerate() {
        let herm = mat2::max_norm(&(s - s.adjoint()));
        let scale = mat2::max_norm(s).max(1.0);
        let det = s.determinant();
        if herm > 1e-8 * scale || s[(0, 0)].re.is_nan() || s[(0, 0)].re <= 0.0 || det.re.is_nan() || det.re <= 0.0 {
            return Err(Error::Domain(format!(
                "loop is not hermitian positive definite at sample {j} (λ = {:.6}{:+.6}i)",
                lambdas[j].re, lambdas[j].im
            )));
        }
    }
    Ok(())
}

/// Iwasawa decomposition `g = F·B` at truncation degree `degree`.
pub fn iwasawa_decompose(g: &LoopMatrix, degree: usize, tol: f64) -> Result<IwasawaFactors> {
    let samples = (4 * degree.max(g.degree()) + 4).max(64);
    let lambdas = crate::loop_algebra::roots_of_unity(samples);
    for (j, s) in g.samples(samples).iter().enumerate() {
        let det = s.determinant();
        if det.norm() < 1e-12 {
            return Err(Error::Domain(format!(
                "loop is singular at sample {j} (λ = {:.6}{:+.6}i)",
                lambdas[j].re, lambdas[j].im
            )));
        }
        if (det - 1.0).norm() > 1e-6 {
            return Err(Error::Domain(format!(
                "loop is not in SL(2,C): det = {det:.6e} at sample {j}"
            )));
        }
    }
    let scale = g.coefficient_norm().max(1.0);
    if !g.is_twisted(1e-10 * scale) {
        return Err(Error::Domain(format!(
            "loop is not twisted (parity defect {:.3e})",
            g.twist_defect()
        )));
    }

    let h = g.star().multiply_to_degree(g, 2 * g.degree())?;
    let sf = spectral_factor(&h, degree, tol)?;
    let unitary = g.multiply_to_degree(&sf.inverse, degree)?;
    let positive = sf.factor;
    let product = unitary.multiply_to_degree(&positive, degree.max(g.degree()))?;
    let residual = product.circle_distance(g, samples);
    if residual > tol || !residual.is_finite() {
        return Err(Error::Truncation { residual, tol, degree });
    }
    Ok(IwasawaFactors { unitary, positive, residual, section_order: sf.section_order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::{c, diag, off};

    fn upper(p: LoopMatrix) -> LoopMatrix {
        // [[1, p], [0, 1]] for a scalar loop p stored in the (0,1) slot.
        let mut u = LoopMatrix::identity(p.degree());
        for (k, m) in p.modes() {
            *u.coeff_mut(k) += off(m[(0, 1)], Complex64::ZERO);
        }
        u
    }

    #[test]
    fn identity_factor() {
        let b = spectral_factorize_positive(&LoopMatrix::identity(2), 8, 1e-12).unwrap();
        assert!(b.coeff_distance(&LoopMatrix::identity(8)) < 1e-14);
    }

    #[test]
    fn constant_cholesky_with_k_normalization() {
        let h = LoopMatrix::constant(diag(c(4.0, 0.0), c(0.25, 0.0)), 1);
        let b = spectral_factorize_positive(&h, 4, 1e-12).unwrap();
        assert!(b.coeff_distance(&LoopMatrix::constant(diag(c(2.0, 0.0), c(0.5, 0.0)), 4)) < 1e-14);
    }

    #[test]
    fn not_positive_definite_names_sample() {
        let h = LoopMatrix::constant(diag(c(-1.0, 0.0), c(-1.0, 0.0)), 1);
        let err = spectral_factorize_positive(&h, 4, 1e-9).unwrap_err();
        assert!(matches!(&err, Error::Domain(msg) if msg.contains("sample 0")), "{err}");
    }

    #[test]
    fn unitary_input_is_its_own_frame() {
        // exp(i t off[λ⁻¹+λ, λ⁻¹+λ]/4) is unitary on the circle.
        let g = LoopMatrix::from_fn(
            |l| {
                let e = (l.inv() + l) * 0.25;
                mat2::expm(&(off(e, e) * c(0.0, 0.7)))
            },
            128,
            32,
        )
        .unwrap();
        let f = iwasawa_decompose(&g, 32, 1e-10).unwrap();
        assert!(f.unitary.coeff_distance(&g) < 1e-12);
        assert!(f.positive.coeff_distance(&LoopMatrix::identity(32)) < 1e-12);
    }

    #[test]
    fn positive_input_is_its_own_factor() {
        let p = upper(LoopMatrix::from_modes(1, &[(1, off(c(0.3, 0.2), Complex64::ZERO))]));
        let g = LoopMatrix::constant(diag(c(1.5, 0.0), c(1.0 / 1.5, 0.0)), 1).multiply(&p).unwrap();
        let f = iwasawa_decompose(&g, 8, 1e-12).unwrap();
        assert!(f.unitary.coeff_distance(&LoopMatrix::identity(8)) < 1e-12);
        assert!(f.positive.coeff_distance(&g) < 1e-12);
    }

    #[test]
    fn singular_loop_rejected() {
        let g = LoopMatrix::constant(diag(c(1.0, 0.0), Complex64::ZERO), 1);
        assert!(matches!(iwasawa_decompose(&g, 4, 1e-9), Err(Error::Domain(_))));
    }

    #[test]
    fn untwisted_loop_rejected() {
        let g = LoopMatrix::from_modes(1, &[(0, mat2::identity()), (1, off(c(0.0, 0.0), c(0.0, 0.0)) + diag(c(0.1, 0.0), c(0.0, 0.0)))]);
        assert!(iwasawa_decompose(&g, 4, 1e-9).is_err());
    }

    fn unipotent(upper: bool, x: Complex64, k: i64) -> LoopMatrix {
        let n = if upper { off(x, Complex64::ZERO) } else { off(Complex64::ZERO, x) };
        LoopMatrix::from_modes(k.unsigned_abs() as usize, &[(0, mat2::identity()), (k, n)])
    }

    /// `diag[d, 1/d]` times alternating unipotent factors in `λ^{±1}`.
    fn random_loop(seed: u64, factors: usize, positive: bool) -> LoopMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = rng.gen_range(0.5..2.0);
        let mut g = LoopMatrix::constant(diag(c(d, 0.0), c(1.0 / d, 0.0)), 0);
        for k in 0..factors {
            let x = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let power = if positive || rng.gen_bool(0.5) { 1 } else { -1 };
            g = g.multiply_to_degree(&unipotent(k % 2 == 0, x, power), g.degree() + 1).unwrap();
        }
        g
    }

    #[test]
    fn recovers_constructed_positive_factor() {
        for seed in 0..10 {
            let p = random_loop(seed, 3, true);
            assert!(p.is_positive_loop(1e-12));
            let h = p.star().multiply_to_degree(&p, 6).unwrap();
            let b = spectral_factorize_positive(&h, 8, 1e-12).unwrap();
            assert!(b.coeff_distance(&p.truncated(8)) < 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn delaunay_frame_at_two() {
        let xi = LoopMatrix::from_modes(1, &[(-1, off(c(0.25, 0.0), c(0.25, 0.0))), (1, off(c(0.25, 0.0), c(0.25, 0.0)))]);
        let w = c(2f64.ln(), 0.0);
        let g = LoopMatrix::from_fn(|l| mat2::expm(&(xi.evaluate(l).unwrap() * w)), 128, 32).unwrap();
        let f = iwasawa_decompose(&g, 32, 1e-8).unwrap();
        let product = f.unitary.multiply(&f.positive).unwrap();
        for l in crate::loop_algebra::roots_of_unity(64) {
            assert!(mat2::max_norm(&(product.evaluate(l).unwrap() - g.evaluate(l).unwrap())) < 1e-8);
        }
        let b0 = f.positive.coeff(0);
        assert!(b0[(0, 1)].norm() < 1e-14 && b0[(1, 0)].norm() < 1e-14);
        assert!(f.rho() > 0.0 && b0[(0, 0)].im.abs() < 1e-14);
    }

    proptest::proptest! {
        #[test]
        fn round_trip_determinant_and_idempotence(seed in 0u64..100_000, factors in 0usize..=4) {
            let g = random_loop(seed, factors, false);
            let f = iwasawa_decompose(&g, 32, 1e-9).unwrap();
            proptest::prop_assert!(f.unitary.multiply(&f.positive).unwrap().circle_distance(&g, 64) <= 1e-9);
            proptest::prop_assert!(f.unitary.determinant_defect(64) <= 1e-9);
            proptest::prop_assert!(f.positive.determinant_defect(64) <= 1e-9);
            proptest::prop_assert!(f.unitary.is_unitary_on_circle(64, 1e-9));
            proptest::prop_assert!(f.positive.is_positive_loop(1e-9));
            let again = iwasawa_decompose(&f.unitary.multiply(&f.positive).unwrap(), 32, 1e-9).unwrap();
            proptest::prop_assert!(again.unitary.coeff_distance(&f.unitary) <= 1e-9);
            proptest::prop_assert!(again.positive.coeff_distance(&f.positive) <= 1e-9);
        }
    }
}
