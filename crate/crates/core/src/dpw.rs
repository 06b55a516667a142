//! The three steps of the DPW construction for a general potential:
//! solve `dΦ = Φξ`, split `Φ = F·B` pointwise, and evaluate the Sym–Bobenko
//! formula at `λ₀`. Also the metric and Hopf data read off the potential, and
//! the symmetry transformations of the associated family.

use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::iwasawa::{iwasawa_decompose, IwasawaFactors};
use crate::loop_algebra::{LoopMatrix, DEFAULT_DEGREE, DEFAULT_TOL};
use crate::mat2::{self, Mat2, I};
use crate::su2::{self, SU2Vector};

/// Default RK4 density, steps per unit arc length of the path.
pub const DEFAULT_STEPS_PER_UNIT: f64 = 64.0;

/// Largest deviation of `F(λ₀)` from SU(2) accepted by the Sym–Bobenko
/// formula.
pub const SYM_UNITARY_TOL: f64 = 1e-6;

/// A holomorphic potential `ξ = A(z, λ) dz` on a plane chart.
///
/// Points of the universal cover are addressed by polylines from the base
/// point; the sheet is the homotopy class of the path.
pub trait Potential: Debug + Send + Sync {
    /// The loop `A(z, ·)`. Its modes must be bounded below by `−1` and it must
    /// be twisted.
    fn coefficient(&self, z: Complex64) -> LoopMatrix;

    fn poles(&self) -> Vec<Complex64> {
        Vec::new()
    }

    /// The solution `Ψ` of `dΨ = Ψξ` at the end of `path` with `Ψ = Id` at
    /// its start, when available in closed form.
    fn closed_form_frame(&self, _path: &[Complex64], _degree: usize) -> Option<LoopMatrix> {
        None
    }
}

/// `ξ = 0`.
#[derive(Clone, Debug, Default)]
pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn coefficient(&self, _z: Complex64) -> LoopMatrix {
        LoopMatrix::zeros(1)
    }

    fn closed_form_frame(&self, _path: &[Complex64], degree: usize) -> Option<LoopMatrix> {
        Some(LoopMatrix::identity(degree))
    }
}

/// `ξ = A(λ) dz` with `A` independent of `z`; the frame is `exp((z − z₀)A)`.
#[derive(Clone, Debug)]
pub struct ConstantPotential {
    pub matrix: LoopMatrix,
}

impl Potential for ConstantPotential {
    fn coefficient(&self, _z: Complex64) -> LoopMatrix {
        self.matrix.clone()
    }

    fn closed_form_frame(&self, path: &[Complex64], degree: usize) -> Option<LoopMatrix> {
        let dz = *path.last()? - *path.first()?;
        let samples = frame_sample_count(degree);
        LoopMatrix::from_fn(
            |l| mat2::expm(&(self.matrix.evaluate(l).expect("λ on the unit circle") * dz)),
            samples,
            degree,
        )
        .ok()
    }
}

/// `C ξ C⁻¹` for a constant `C ∈ SL(2,ℂ)`.
#[derive(Clone, Debug)]
pub struct ConjugatedPotential {
    pub inner: Arc<dyn Potential>,
    pub by: Mat2,
}

impl ConjugatedPotential {
    pub fn new(inner: Arc<dyn Potential>, by: Mat2) -> Result<Self> {
        if (by.determinant() - 1.0).norm() > 1e-12 {
            return Err(Error::Domain("conjugating matrix must have determinant one".into()));
        }
        Ok(ConjugatedPotential { inner, by })
    }
}

impl Potential for ConjugatedPotential {
    fn coefficient(&self, z: Complex64) -> LoopMatrix {
        self.inner.coefficient(z).sandwich(&self.by, &mat2::adjugate(&self.by))
    }

    fn poles(&self) -> Vec<Complex64> {
        self.inner.poles()
    }

    fn closed_form_frame(&self, path: &[Complex64], degree: usize) -> Option<LoopMatrix> {
        self.inner
            .closed_form_frame(path, degree)
            .map(|f| f.sandwich(&self.by, &mat2::adjugate(&self.by)))
    }
}

/// Samples used when a frame is built pointwise in `λ`.
pub fn frame_sample_count(degree: usize) -> usize {
    (4 * degree).max(2 * degree + 2).max(16)
}

/// The data `(ξ, Φ₀, z̃₀)` together with `H` and the evaluation point `λ₀`.
#[derive(Clone, Debug)]
pub struct DPWTriple {
    pub potential: Arc<dyn Potential>,
    pub initial_frame: LoopMatrix,
    pub base_point: Complex64,
    pub mean_curvature: f64,
    pub lambda0: Complex64,
}

impl DPWTriple {
    pub fn new(
        potential: Arc<dyn Potential>,
        initial_frame: LoopMatrix,
        base_point: Complex64,
        mean_curvature: f64,
        lambda0: Complex64,
    ) -> Result<Self> {
        if mean_curvature == 0.0 || !mean_curvature.is_finite() {
            return Err(Error::Domain(format!("mean curvature must be finite and nonzero, got {mean_curvature}")));
        }
        if !mat2::on_unit_circle(lambda0, 1e-12) {
            return Err(Error::Domain(format!("λ₀ must lie on the unit circle, |λ₀| = {}", lambda0.norm())));
        }
        let scale = initial_frame.coefficient_norm().max(1.0);
        if !initial_frame.is_twisted(1e-12 * scale) {
            return Err(Error::Domain("initial frame is not twisted".into()));
        }
        if initial_frame.determinant_defect(initial_frame.default_sample_count()) > 1e-9 {
            return Err(Error::Domain("initial frame does not have determinant one".into()));
        }
        Ok(DPWTriple { potential, initial_frame, base_point, mean_curvature, lambda0 })
    }

    /// Same data evaluated at another `λ₀`.
    pub fn with_lambda0(&self, lambda0: Complex64) -> Result<Self> {
        Self::new(self.potential.clone(), self.initial_frame.clone(), self.base_point, self.mean_curvature, lambda0)
    }

    fn check_path(&self, path: &[Complex64]) -> Result<()> {
        let first = *path
            .first()
            .ok_or_else(|| Error::Argument("empty path".into()))?;
        if (first - self.base_point).norm() > 1e-12 * (1.0 + self.base_point.norm()) {
            return Err(Error::Argument(format!(
                "path starts at {first} instead of the base point {}",
                self.base_point
            )));
        }
        let poles = self.potential.poles();
        for seg in path.windows(2) {
            for p in &poles {
                if segment_distance(*p, seg[0], seg[1]) <= 1e-12 * (1.0 + p.norm()) {
                    return Err(Error::Domain(format!(
                        "path segment {} → {} passes through the pole {p}",
                        seg[0], seg[1]
                    )));
                }
            }
        }
        Ok(())
    }
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (a + ab * t - p).norm()
}

/// Euclidean length of a polyline.
pub fn path_length(path: &[Complex64]) -> f64 {
    path.windows(2).map(|s| (s[1] - s[0]).norm()).sum()
}

/// `Φ` at the end of `path`, by fixed-step RK4 on the loop coefficients.
pub fn integrate_frame(
    triple: &DPWTriple,
    path: &[Complex64],
    steps_per_segment: usize,
    degree: usize,
) -> Result<LoopMatrix> {
    integrate_with(triple, path, degree, |_| steps_per_segment)
}

/// As [`integrate_frame`] with the step count of each segment proportional
/// to its length.
pub fn integrate_frame_density(
    triple: &DPWTriple,
    path: &[Complex64],
    steps_per_unit: f64,
    degree: usize,
) -> Result<LoopMatrix> {
    integrate_with(triple, path, degree, |len| (len * steps_per_unit).ceil().max(1.0) as usize)
}

fn integrate_with(
    triple: &DPWTriple,
    path: &[Complex64],
    degree: usize,
    steps_for: impl Fn(f64) -> usize,
) -> Result<LoopMatrix> {
    triple.check_path(path)?;
    let mut phi = triple.initial_frame.truncated(degree);
    for seg in path.windows(2) {
        let (za, zb) = (seg[0], seg[1]);
        let dz = zb - za;
        let steps = steps_for(dz.norm());
        if steps == 0 {
            return Err(Error::Integration("zero steps on a path segment".into()));
        }
        let h = 1.0 / steps as f64;
        if dz.norm() > 0.0 && dz.norm() * h <= f64::EPSILON * (1.0 + za.norm()) {
            return Err(Error::Integration(format!("step underflow on segment {za} → {zb}")));
        }
        let rhs = |phi: &LoopMatrix, s: f64| -> Result<LoopMatrix> {
            let a = triple.potential.coefficient(za + dz * s).scaled(dz);
            phi.multiply_to_degree(&a, degree)
        };
        for step in 0..steps {
            let s = step as f64 * h;
            let k1 = rhs(&phi, s)?;
            let k2 = rhs(&phi.add(&k1.scaled(Complex64::from(h / 2.0))), s + h / 2.0)?;
            let k3 = rhs(&phi.add(&k2.scaled(Complex64::from(h / 2.0))), s + h / 2.0)?;
            let k4 = rhs(&phi.add(&k3.scaled(Complex64::from(h))), s + h)?;
            let incr = k1.add(&k2.scaled(Complex64::from(2.0))).add(&k3.scaled(Complex64::from(2.0))).add(&k4);
            phi = phi.add(&incr.scaled(Complex64::from(h / 6.0)));
        }
        if !phi.coeffs().iter().all(|m| m.iter().all(|z| z.is_finite())) {
            return Err(Error::Integration(format!("non-finite frame after segment {za} → {zb}")));
        }
    }
    Ok(phi)
}

fn sym_bobenko_impl(f: &LoopMatrix, lambda0: Complex64, h: f64, normal_sign: f64) -> Result<SU2Vector> {
    if !mat2::on_unit_circle(lambda0, 1e-12) {
        return Err(Error::Domain(format!("λ₀ must lie on the unit circle, |λ₀| = {}", lambda0.norm())));
    }
    if h == 0.0 {
        return Err(Error::Domain("mean curvature must be nonzero".into()));
    }
    let f0 = f.evaluate(lambda0)?;
    if !mat2::is_special_unitary(&f0, SYM_UNITARY_TOL) {
        return Err(Error::Domain(format!("frame is not unitary at λ₀ = {lambda0}")));
    }
    let df = f.lambda_derivative().evaluate(lambda0)?;
    let finv = mat2::adjugate(&f0);
    let translation = df * finv * (I * lambda0);
    let rotation = f0 * mat2::sigma() * finv * (I * 0.5 * normal_sign);
    let x = (translation + rotation) * Complex64::from(-1.0 / h);
    SU2Vector::from_matrix(&x, SYM_UNITARY_TOL * (1.0 + mat2::max_norm(&x)))
}

/// `f = −(1/H)(iλ(∂_λF)F⁻¹ + (i/2)FσF⁻¹)` at `λ₀`, as a point of ℝ³.
pub fn sym_bobenko(f: &LoopMatrix, lambda0: Complex64, h: f64) -> Result<SU2Vector> {
    sym_bobenko_impl(f, lambda0, h, 1.0)
}

/// The parallel constant mean curvature surface: the sign of the
/// `(i/2)FσF⁻¹` term is flipped.
pub fn sym_bobenko_parallel(f: &LoopMatrix, lambda0: Complex64, h: f64) -> Result<SU2Vector> {
    sym_bobenko_impl(f, lambda0, h, -1.0)
}

/// Options for [`immerse`].
#[derive(Clone, Copy, Debug)]
pub struct ImmerseOptions {
    pub degree: usize,
    pub tol: f64,
    pub steps_per_unit: f64,
    /// Use the potential's closed-form frame when it has one.
    pub closed_form: bool,
}

impl Default for ImmerseOptions {
    fn default() -> Self {
        ImmerseOptions {
            degree: DEFAULT_DEGREE,
            tol: DEFAULT_TOL,
            steps_per_unit: DEFAULT_STEPS_PER_UNIT,
            closed_form: true,
        }
    }
}

/// Everything computed at one point of the surface.
#[derive(Clone, Debug)]
pub struct Immersion {
    pub position: SU2Vector,
    pub parallel: SU2Vector,
    /// Unit normal, `H·(parallel − position)`.
    pub normal: SU2Vector,
    pub factors: IwasawaFactors,
}

/// The holomorphic frame `Φ` at the end of `path`.
pub fn frame(triple: &DPWTriple, path: &[Complex64], opts: &ImmerseOptions) -> Result<LoopMatrix> {
    if opts.closed_form {
        triple.check_path(path)?;
        if let Some(psi) = triple.potential.closed_form_frame(path, opts.degree) {
            return triple.initial_frame.multiply_to_degree(&psi, opts.degree);
        }
    }
    integrate_frame_density(triple, path, opts.steps_per_unit, opts.degree)
}

/// Full pipeline at the end of `path`.
pub fn immerse_detailed(triple: &DPWTriple, path: &[Complex64], opts: &ImmerseOptions) -> Result<Immersion> {
    let phi = frame(triple, path, opts)?;
    let factors = iwasawa_decompose(&phi, opts.degree, opts.tol)?;
    let h = triple.mean_curvature;
    let position = sym_bobenko(&factors.unitary, triple.lambda0, h)?;
    let parallel = sym_bobenko_parallel(&factors.unitary, triple.lambda0, h)?;
    let normal = (parallel - position) * h;
    Ok(Immersion { position, parallel, normal, factors })
}

/// `f_{λ₀}` at the end of `path`.
pub fn immerse(triple: &DPWTriple, path: &[Complex64], opts: &ImmerseOptions) -> Result<SU2Vector> {
    immerse_detailed(triple, path, opts).map(|i| i.position)
}

/// Metric density `4 r₀⁴ |a₁|²` of `f₁` (for `H = 1`), where
/// `ξ = λ⁻¹ off[a₁, a₂] + …` and `B(0) = diag[r₀, 1/r₀]`.
pub fn metric_density(r0: f64, a1: Complex64) -> f64 {
    4.0 * r0.powi(4) * a1.norm_sqr()
}

/// Hopf differential coefficient `Q = −a₁a₂/2`.
pub fn hopf_coefficient(a1: Complex64, a2: Complex64) -> Complex64 {
    -a1 * a2 * 0.5
}

/// The data `(e₃ξe₃⁻¹, e₃Φ₀e₃⁻¹, z̃₀)`, which generates the parallel family
/// rotated by π about e₃.
pub fn parallel_family_triple(triple: &DPWTriple) -> Result<DPWTriple> {
    let e3 = su2::e3();
    let e3_inv = mat2::adjugate(&e3);
    let potential = Arc::new(ConjugatedPotential::new(triple.potential.clone(), e3)?);
    DPWTriple::new(
        potential,
        triple.initial_frame.sandwich(&e3, &e3_inv),
        triple.base_point,
        triple.mean_curvature,
        triple.lambda0,
    )
}

/// The data `(A⁻¹ξA, CΦ₀A, z̃₀)` with `A = diag[α, ᾱ]`, `|α| = 1`, and `C` a
/// loop unitary on the circle.
pub fn rigid_motion_triple(triple: &DPWTriple, c: &LoopMatrix, alpha: Complex64) -> Result<DPWTriple> {
    if !mat2::on_unit_circle(alpha, 1e-12) {
        return Err(Error::Domain("|α| must be one".into()));
    }
    let a = mat2::diag(alpha, alpha.conj());
    let a_inv = mat2::adjugate(&a);
    let potential = Arc::new(ConjugatedPotential::new(triple.potential.clone(), a_inv)?);
    let degree = triple.initial_frame.degree().max(c.degree());
    let initial = c.multiply_to_degree(&triple.initial_frame, degree)?.sandwich(&mat2::identity(), &a);
    DPWTriple::new(potential, initial, triple.base_point, triple.mean_curvature, triple.lambda0)
}

/// Image of `f_{λ₀}` under the rigid motion induced by `C`:
/// `−(1/H) iλ₀(∂_λC)C⁻¹ + C f C⁻¹`.
pub fn rigid_motion_image(c: &LoopMatrix, lambda0: Complex64, h: f64, f: SU2Vector) -> Result<SU2Vector> {
    let c0 = c.evaluate(lambda0)?;
    if !mat2::is_special_unitary(&c0, SYM_UNITARY_TOL) {
        return Err(Error::Domain("C is not unitary at λ₀".into()));
    }
    let c_inv = mat2::adjugate(&c0);
    let dc = c.lambda_derivative().evaluate(lambda0)?;
    let translation = dc * c_inv * (I * lambda0) * Complex64::from(-1.0 / h);
    let t = SU2Vector::from_matrix(&translation, SYM_UNITARY_TOL * (1.0 + mat2::max_norm(&translation)))?;
    Ok(t + f.conjugated(&c0))
}
