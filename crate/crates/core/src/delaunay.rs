//! Delaunay surfaces from the potential `ξ = ξ₋₁ dz/z` on `ℂ*` with
//!
//! ```text
//! ξ₋₁ = [[c, aλ⁻¹ + b̄λ], [bλ⁻¹ + āλ, −c]]
//! ```
//!
//! The frame is `exp(log z · ξ₋₁)`, the monodromy around `z = 0` is
//! `exp(2πi ξ₋₁)`, and the surfaces close at `λ₀ = 1` when `μ(1) ∈ ½ℤ` and
//! `ab ∈ ℝ`, where `μ(λ)² = −det ξ₋₁(λ)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dpw::{frame_sample_count, ConstantPotential, DPWTriple, Potential};
use crate::error::{Error, Result};
use crate::loop_algebra::LoopMatrix;
use crate::mat2::{self, Mat2, I};
use crate::monodromy::{closing_conditions, ClosingReport, MonodromyMatrix, DECK_GENERATOR};
use crate::su2::{self, SU2Vector};

/// Tolerance for the algebraic predicates on `(a, b, c)`.
pub const PARAM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelaunayParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: f64,
    /// Mean curvature `H`.
    pub h: f64,
    pub lambda0: Complex64,
}

impl DelaunayParams {
    /// Real weights with `H = 1` and `λ₀ = 1`.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::complex(Complex64::from(a), Complex64::from(b), c)
    }

    pub fn complex(a: Complex64, b: Complex64, c: f64) -> Result<Self> {
        let p = DelaunayParams { a, b, c, h: 1.0, lambda0: Complex64::from(1.0) };
        p.validate()?;
        Ok(p)
    }

    pub fn with_mean_curvature(mut self, h: f64) -> Result<Self> {
        self.h = h;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda0_arg(mut self, arg: f64) -> Result<Self> {
        self.lambda0 = Complex64::from_polar(1.0, arg);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.h.is_finite();
        if !finite {
            return Err(Error::Domain("Delaunay parameters must be finite".into()));
        }
        if self.a == Complex64::ZERO {
            return Err(Error::Domain("a = 0 gives a branched immersion".into()));
        }
        if self.h == 0.0 {
            return Err(Error::Domain("mean curvature H must be nonzero".into()));
        }
        if !mat2::on_unit_circle(self.lambda0, 1e-12) {
            return Err(Error::Domain("λ₀ must lie on the unit circle".into()));
        }
        Ok(())
    }

    pub fn ab(&self) -> Complex64 {
        self.a * self.b
    }

    /// `ξ₋₁(λ)`.
    pub fn xi_at(&self, lambda: Complex64) -> Mat2 {
        let (a, b) = (self.a, self.b);
        let li = lambda.inv();
        mat2::mat(
            Complex64::from(self.c),
            a * li + b.conj() * lambda,
            b * li + a.conj() * lambda,
            Complex64::from(-self.c),
        )
    }

    /// `ξ₋₁` as a loop with modes `{−1, 0, 1}`.
    pub fn xi_minus_one(&self) -> LoopMatrix {
        LoopMatrix::from_modes(
            1,
            &[
                (-1, mat2::off(self.a, self.b)),
                (0, mat2::diag(Complex64::from(self.c), Complex64::from(-self.c))),
                (1, mat2::off(self.b.conj(), self.a.conj())),
            ],
        )
    }
}

/// Parameter file: `a`, `b` as numbers or `[re, im]` pairs, plus `c`, `H`
/// and `lambda0_arg`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamsFile {
    pub a: Weight,
    pub b: Weight,
    #[serde(default)]
    pub c: f64,
    #[serde(rename = "H", default = "one")]
    pub h: f64,
    #[serde(default)]
    pub lambda0_arg: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weight {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Weight> for Complex64 {
    fn from(w: Weight) -> Complex64 {
        match w {
            Weight::Real(x) => Complex64::from(x),
            Weight::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

impl ParamsFile {
    pub fn into_params(self) -> Result<DelaunayParams> {
        DelaunayParams::complex(self.a.into(), self.b.into(), self.c)?
            .with_mean_curvature(self.h)?
            .with_lambda0_arg(self.lambda0_arg)
    }

    pub fn from_json(text: &str) -> Result<DelaunayParams> {
        serde_json::from_str::<ParamsFile>(text)?.into_params()
    }
}

/// `ξ = ξ₋₁ dz/z` in the `z`-chart, with its pole at the origin.
#[derive(Clone, Debug)]
pub struct DelaunayPotential {
    pub params: DelaunayParams,
}

impl Potential for DelaunayPotential {
    fn coefficient(&self, z: Complex64) -> LoopMatrix {
        self.params.xi_minus_one().scaled(z.inv())
    }

    fn poles(&self) -> Vec<Complex64> {
        vec![Complex64::ZERO]
    }

    fn closed_form_frame(&self, path: &[Complex64], degree: usize) -> Option<LoopMatrix> {
        let w = tracked_log(path)?;
        Some(closed_form_frame(&self.params, w, degree))
    }
}

pub fn delaunay_potential(p: &DelaunayParams) -> DelaunayPotential {
    DelaunayPotential { params: *p }
}

/// `log(z_end) − log(z_start)` continued along the polyline.
pub fn tracked_log(path: &[Complex64]) -> Option<Complex64> {
    let (first, last) = (*path.first()?, *path.last()?);
    if first == Complex64::ZERO || last == Complex64::ZERO {
        return None;
    }
    let winding: f64 = path.windows(2).map(|s| (s[1] / s[0]).arg()).sum();
    Some(Complex64::new((last.norm() / first.norm()).ln(), winding))
}

/// Radial segment from `1` to `e^ρ`, then chords of the circle `|z| = e^ρ`
/// through the angle `t`. Ends at the cover point `z̃ = ρ + it`.
pub fn cover_path(rho: f64, t: f64) -> Vec<Complex64> {
    let mut path = vec![Complex64::from(1.0)];
    let r = rho.exp();
    if rho != 0.0 {
        path.push(Complex64::from(r));
    }
    let chords = (t.abs() / (PI / 8.0)).ceil() as usize;
    for k in 1..=chords {
        path.push(Complex64::from_polar(r, t * k as f64 / chords as f64));
    }
    path
}

/// The DPW data `(ξ, Id, z = 1)` with the parameters' `H` and `λ₀`.
pub fn delaunay_triple(p: &DelaunayParams) -> Result<DPWTriple> {
    DPWTriple::new(
        Arc::new(delaunay_potential(p)),
        LoopMatrix::identity(1),
        Complex64::from(1.0),
        p.h,
        p.lambda0,
    )
}

/// The same data in the cover chart `z̃ = log z`, where the potential is the
/// constant `ξ₋₁ dz̃` and the base point is `z̃₀ = 0`.
pub fn delaunay_cover_triple(p: &DelaunayParams) -> Result<DPWTriple> {
    DPWTriple::new(
        Arc::new(ConstantPotential { matrix: p.xi_minus_one() }),
        LoopMatrix::identity(1),
        Complex64::ZERO,
        p.h,
        p.lambda0,
    )
}

/// `0 → ρ → ρ + it` in the cover chart: the images of the radial segment and
/// the circular arc of [`cover_path`].
pub fn cover_chart_path(rho: f64, t: f64) -> Vec<Complex64> {
    vec![Complex64::ZERO, Complex64::from(rho), Complex64::new(rho, t)]
}

/// Principal square root of `|a|² + |b|² + c² + abλ⁻² + (ab)̄λ²`.
pub fn mu(p: &DelaunayParams, lambda: Complex64) -> Complex64 {
    let ab = p.ab();
    let radicand = p.a.norm_sqr() + p.b.norm_sqr() + p.c * p.c + ab * lambda.powi(-2) + ab.conj() * lambda.powi(2);
    radicand.sqrt()
}

/// `exp(w · ξ₋₁)` for the cover point `w = log z`, sampled pointwise in `λ`.
pub fn closed_form_frame(p: &DelaunayParams, log_z: Complex64, degree: usize) -> LoopMatrix {
    LoopMatrix::from_fn(|l| mat2::expm(&(p.xi_at(l) * log_z)), frame_sample_count(degree), degree)
        .expect("sample count resolves the degree")
}

/// `T diag[z^{−μ}, z^{μ}] T⁻¹` at one `λ`, or `None` where `T` is singular
/// (`μ = 0` or `āλ² + b = 0`).
pub fn diagonalized_frame(p: &DelaunayParams, log_z: Complex64, lambda: Complex64) -> Option<Mat2> {
    let m = mu(p, lambda);
    let denom = p.a.conj() * lambda * lambda + p.b;
    if m.norm() < 1e-8 || denom.norm() < 1e-8 {
        return None;
    }
    let c = Complex64::from(p.c);
    let t = mat2::mat((c - m) * lambda / denom, (c + m) * lambda / denom, Complex64::from(1.0), Complex64::from(1.0));
    let t_inv = mat2::inverse(&t)?;
    Some(t * mat2::diag((-m * log_z).exp(), (m * log_z).exp()) * t_inv)
}

/// `χ = exp(2πi ξ₋₁)`.
pub fn closed_form_monodromy(p: &DelaunayParams, degree: usize) -> MonodromyMatrix {
    MonodromyMatrix {
        chi: closed_form_frame(p, Complex64::new(0.0, 2.0 * PI), degree),
        generator: DECK_GENERATOR.to_string(),
    }
}

/// Algebraic closing constraints at `λ = 1`, cross-checked against the
/// closed-form monodromy at `λ₀`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ClosingCheck {
    pub report: ClosingReport,
    pub mu1: f64,
    pub mu1_half_integer: bool,
    pub simply_wrapped: bool,
    pub ab_real: bool,
    /// `|a + b̄|² + c² = 1/4`.
    pub elliptic_cylinder: bool,
    /// The algebraic verdict agrees with the monodromy verdict.
    pub consistent: bool,
}

impl ClosingCheck {
    pub fn closes(&self) -> bool {
        self.report.closes()
    }
}

pub fn check_closing(p: &DelaunayParams, degree: usize, tol: f64) -> Result<ClosingCheck> {
    let mu1 = mu(p, Complex64::from(1.0)).re;
    let twice = 2.0 * mu1;
    let mu1_half_integer = (twice - twice.round()).abs() <= tol;
    let simply_wrapped = (mu1 - 0.5).abs() <= tol;
    let ab_real = p.ab().im.abs() <= tol.max(PARAM_TOL);
    let elliptic_cylinder = ((p.a + p.b.conj()).norm_sqr() + p.c * p.c - 0.25).abs() <= tol;
    let report = closing_conditions(&closed_form_monodromy(p, degree), p.lambda0, tol)?;
    let consistent = (mu1_half_integer && ab_real) == report.closes();
    Ok(ClosingCheck { report, mu1, mu1_half_integer, simply_wrapped, ab_real, elliptic_cylinder, consistent })
}

/// Real weights together with the diagonal unitary `A` for which
/// `A⁻¹ξ₋₁A` has the real weights.
#[derive(Clone, Copy, Debug)]
pub struct Normalization {
    pub a: f64,
    pub b: f64,
    pub rotation: Mat2,
}

/// With `γ = e^{i arg a}` and `A = diag[√γ, √γ̄]`: `a' = γ̄a = |a|`, `b' = γb`.
pub fn rotation_normalize(a: Complex64, b: Complex64) -> Result<Normalization> {
    if a == Complex64::ZERO {
        return Err(Error::Domain("a = 0 cannot be normalized".into()));
    }
    let ab = a * b;
    if ab.im.abs() > PARAM_TOL * (1.0 + ab.norm()) {
        return Err(Error::Domain(format!("ab = {ab} is not real")));
    }
    let theta = a.arg();
    let gamma = Complex64::from_polar(1.0, theta);
    let root = Complex64::from_polar(1.0, theta / 2.0);
    let rotation = mat2::diag(root, root.conj());
    Ok(Normalization { a: a.norm(), b: (gamma * b).re, rotation })
}

impl DelaunayParams {
    /// The rotation-normalized real parameters (same `c`, `H`, `λ₀`).
    pub fn normalized(&self) -> Result<(DelaunayParams, Mat2)> {
        let n = rotation_normalize(self.a, self.b)?;
        let p = DelaunayParams { a: Complex64::from(n.a), b: Complex64::from(n.b), ..*self };
        Ok((p, n.rotation))
    }
}

/// `(neck, bulge)` from `(1/(2H))(1 ± √(1 − 16ab))`, as lengths. For
/// nodoids (`ab < 0`) the smaller root is negative and its modulus is the
/// neck.
pub fn neck_bulge_radii(p: &DelaunayParams) -> Result<(f64, f64)> {
    let ab = p.ab();
    if ab.im.abs() > PARAM_TOL * (1.0 + ab.norm()) {
        return Err(Error::Domain(format!("ab = {ab} is not real")));
    }
    let disc = 1.0 - 16.0 * ab.re;
    if disc < -PARAM_TOL {
        return Err(Error::Domain(format!("16ab = {} > 1: no real neck or bulge", 16.0 * ab.re)));
    }
    let s = disc.max(0.0).sqrt();
    let scale = 1.0 / (2.0 * p.h.abs());
    let lo = (scale * (1.0 - s)).abs();
    let hi = scale * (1.0 + s);
    Ok((lo.min(hi), lo.max(hi)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Unduloid,
    Nodoid,
    Cylinder,
    SphereLimit,
    /// Branched (`a = 0`) or outside the admissible range.
    Invalid,
}

impl SurfaceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SurfaceKind::Unduloid => "unduloid",
            SurfaceKind::Nodoid => "nodoid",
            SurfaceKind::Cylinder => "cylinder",
            SurfaceKind::SphereLimit => "sphere-limit",
            SurfaceKind::Invalid => "invalid",
        }
    }
}

/// Sign rule on `ab`: positive gives unduloids (the round cylinder at
/// `16ab = 1`), negative nodoids, zero the sphere limit.
pub fn classify(p: &DelaunayParams) -> SurfaceKind {
    let ab = p.ab();
    if p.a == Complex64::ZERO || ab.im.abs() > PARAM_TOL * (1.0 + ab.norm()) {
        return SurfaceKind::Invalid;
    }
    let x = 16.0 * ab.re;
    if x > 1.0 + 1e-9 {
        SurfaceKind::Invalid
    } else if (1.0 - x).abs() <= 1e-9 {
        SurfaceKind::Cylinder
    } else if x.abs() <= PARAM_TOL {
        SurfaceKind::SphereLimit
    } else if x > 0.0 {
        SurfaceKind::Unduloid
    } else {
        SurfaceKind::Nodoid
    }
}

/// Axis and the image circle of `|z| = 1`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AxisCircle {
    pub axis_direction: SU2Vector,
    pub circle_center: SU2Vector,
    pub circle_radius: f64,
    pub cos_theta: f64,
}

/// Image of `|z| = 1` at `samples` equally spaced angles; the frame there is
/// `exp(itξ₋₁)`, already unitary.
pub fn unit_circle_image(p: &DelaunayParams, samples: usize, degree: usize) -> Result<Vec<SU2Vector>> {
    (0..samples)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / samples as f64;
            let f = closed_form_frame(p, Complex64::new(0.0, t), degree);
            crate::dpw::sym_bobenko(&f, p.lambda0, p.h)
        })
        .collect()
}

/// Axis direction `iξ₋₁(λ₀)`, circle radius `2|a/H|`, `cos θ = 2(a + b)` and
/// center `((8a² + 8ab − 1)/(2H)) e₁ − (4ac/H) e₃` in the real-normalized
/// frame, rotated back for complex weights. Only `λ₀ = ±1` is supported:
/// elsewhere the image of `|z| = 1` is a helix.
pub fn axis_and_circle(p: &DelaunayParams) -> Result<AxisCircle> {
    let one = Complex64::from(1.0);
    let flipped = if (p.lambda0 - one).norm() <= 1e-12 {
        false
    } else if (p.lambda0 + one).norm() <= 1e-12 {
        true
    } else {
        return Err(Error::Domain(format!("axis and circle need λ₀ = ±1, got {}", p.lambda0)));
    };
    let (n, rotation) = p.normalized()?;
    let (a, b, c, h) = (n.a.re, n.b.re, n.c, n.h);
    let axis_m = p.xi_at(p.lambda0) * I;
    let axis_direction = SU2Vector::from_matrix(&axis_m, 1e-12 * (1.0 + mat2::max_norm(&axis_m)))?
        .normalized()
        .ok_or_else(|| Error::Domain("ξ₋₁(λ₀) vanishes; no rotation axis".into()))?;
    let center = SU2Vector::new((8.0 * a * a + 8.0 * a * b - 1.0) / (2.0 * h), 0.0, -4.0 * a * c / h)
        .conjugated(&rotation);
    Ok(AxisCircle {
        axis_direction,
        circle_center: if flipped { center.rotated_about_e1() } else { center },
        circle_radius: 2.0 * (a / h).abs(),
        cos_theta: 2.0 * (a + b),
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DelaunayGeometry {
    pub neck_radius: f64,
    pub bulge_radius: f64,
    pub axis_direction: SU2Vector,
    pub circle_center: SU2Vector,
    pub circle_radius: f64,
    pub cos_theta: f64,
    pub classification: SurfaceKind,
}

pub fn geometry(p: &DelaunayParams) -> Result<DelaunayGeometry> {
    let (neck_radius, bulge_radius) = neck_bulge_radii(p)?;
    let ac = axis_and_circle(p)?;
    Ok(DelaunayGeometry {
        neck_radius,
        bulge_radius,
        axis_direction: ac.axis_direction,
        circle_center: ac.circle_center,
        circle_radius: ac.circle_radius,
        cos_theta: ac.cos_theta,
        classification: classify(p),
    })
}

/// `s = r/√(1 + ṙ²) − r²H`, constant along the profile of a surface of
/// revolution with mean curvature `H`.
pub fn profile_first_integral(r: f64, rdot: f64, h: f64) -> f64 {
    r / (1.0 + rdot * rdot).sqrt() - r * r * h
}

/// Rotation axis `e₃` conjugation used by the parallel family.
pub fn e3() -> Mat2 {
    su2::e3()
}
