//! Monodromy of the holomorphic frame along a closed loop around a puncture,
//! and the two closing conditions `χ(λ₀) = ±Id`, `∂_λχ(λ₀) = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dpw::{integrate_frame, DPWTriple};
use crate::error::{Error, Result};
use crate::loop_algebra::{roots_of_unity, LoopMatrix};
use crate::mat2::{self, I};

/// Default tolerance for both closing conditions.
pub const CLOSING_TOL: f64 = 1e-7;

/// Label of the deck generator of the Delaunay cover.
pub const DECK_GENERATOR: &str = "z~ -> z~ + 2 pi i";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonodromyMatrix {
    pub chi: LoopMatrix,
    pub generator: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosingReport {
    /// Distance of `χ(λ₀)` to the nearer of `±Id`, max norm.
    pub cond1_residual: f64,
    /// Sign of the nearer of `±Id`.
    pub cond1_sign: i8,
    /// `‖∂_λχ(λ₀)‖∞`.
    pub cond2_residual: f64,
    pub passes: [bool; 2],
    pub tol: f64,
}

impl ClosingReport {
    pub fn closes(&self) -> bool {
        self.passes[0] && self.passes[1]
    }
}

/// Counter-clockwise polygon on the circle `|z| = |base|` starting and ending
/// at `base`; homotopic to the deck generator around `z = 0`.
pub fn circle_loop(base: Complex64, segments: usize) -> Vec<Complex64> {
    let segments = segments.max(3);
    (0..=segments)
        .map(|k| {
            if k == segments {
                base
            } else {
                base * Complex64::from_polar(1.0, 2.0 * PI * k as f64 / segments as f64)
            }
        })
        .collect()
}

/// `χ = Φ(end)·Φ₀⁻¹` after integrating once along the closed `loop_path`.
pub fn compute_monodromy(
    triple: &DPWTriple,
    loop_path: &[Complex64],
    steps_per_segment: usize,
    degree: usize,
) -> Result<MonodromyMatrix> {
    let (first, last) = match (loop_path.first(), loop_path.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(Error::Argument("empty monodromy path".into())),
    };
    if (first - last).norm() > 1e-12 * (1.0 + first.norm()) {
        return Err(Error::Argument("monodromy path is not closed".into()));
    }
    let end = integrate_frame(triple, loop_path, steps_per_segment, degree)?;
    let chi = end.multiply_to_degree(&triple.initial_frame.adjugate(), degree)?;
    Ok(MonodromyMatrix { chi, generator: DECK_GENERATOR.to_string() })
}

/// Whether `ξ` is skew-hermitian along `|z| = 1` (tested on `samples` points
/// in `z` and in `λ`) and `Φ₀` is unitary; then `χ` is unitary on the circle.
pub fn certify_unitary_monodromy(triple: &DPWTriple, samples: usize, tol: f64) -> bool {
    if !mat2::on_unit_circle(triple.base_point, tol) {
        return false;
    }
    if !triple.initial_frame.is_unitary_on_circle(samples.max(8), tol) {
        return false;
    }
    let lambdas = roots_of_unity(samples.max(4));
    for z in roots_of_unity(samples.max(4)) {
        // Along z = e^{it}: ξ = A(z) i z dt.
        let a = triple.potential.coefficient(z).scaled(I * z);
        for &l in &lambdas {
            let m = match a.evaluate(l) {
                Ok(m) => m,
                Err(_) => return false,
            };
            if mat2::max_norm(&(m + m.adjoint())) > tol {
                return false;
            }
        }
    }
    true
}

pub fn closing_conditions(chi: &MonodromyMatrix, lambda0: Complex64, tol: f64) -> Result<ClosingReport> {
    if !mat2::on_unit_circle(lambda0, 1e-12) {
        return Err(Error::Domain(format!("λ₀ must lie on the unit circle, |λ₀| = {}", lambda0.norm())));
    }
    let at = chi.chi.evaluate(lambda0)?;
    let plus = mat2::max_norm(&(at - mat2::identity()));
    let minus = mat2::max_norm(&(at + mat2::identity()));
    let (cond1_residual, cond1_sign) = if minus <= plus { (minus, -1) } else { (plus, 1) };
    let cond2_residual = mat2::max_norm(&chi.chi.lambda_derivative().evaluate(lambda0)?);
    Ok(ClosingReport {
        cond1_residual,
        cond1_sign,
        cond2_residual,
        passes: [cond1_residual <= tol, cond2_residual <= tol],
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpw::{ConjugatedPotential, Potential, ZeroPotential};
    use crate::mat2::{c, off};
    use std::sync::Arc;

    #[derive(Debug)]
    struct Residue;
    impl Potential for Residue {
        fn coefficient(&self, z: Complex64) -> LoopMatrix {
            let q = off(c(0.25, 0.0), c(0.25, 0.0));
            LoopMatrix::from_modes(1, &[(-1, q), (1, q)]).scaled(z.inv())
        }
        fn poles(&self) -> Vec<Complex64> {
            vec![Complex64::ZERO]
        }
    }

    fn triple(p: Arc<dyn Potential>, phi0: LoopMatrix) -> DPWTriple {
        DPWTriple::new(p, phi0, c(1.0, 0.0), 1.0, c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn zero_potential_has_trivial_monodromy() {
        let t = triple(Arc::new(ZeroPotential), LoopMatrix::identity(4));
        let m = compute_monodromy(&t, &circle_loop(c(1.0, 0.0), 16), 4, 8).unwrap();
        assert!(m.chi.coeff_distance(&LoopMatrix::identity(8)) < 1e-15);
    }

    #[test]
    fn cylinder_monodromy_is_minus_identity() {
        let t = triple(Arc::new(Residue), LoopMatrix::identity(32));
        let m = compute_monodromy(&t, &circle_loop(c(1.0, 0.0), 64), 8, 32).unwrap();
        let r = closing_conditions(&m, c(1.0, 0.0), 1e-8).unwrap();
        assert_eq!(r.cond1_sign, -1);
        assert!(r.closes(), "{r:?}");
        assert!(m.chi.is_unitary_on_circle(64, 1e-8));
    }

    #[test]
    fn conjugated_solution_conjugates_monodromy() {
        // Φ̂ = CΦ with a λ-dependent twisted C.
        let q = off(c(0.25, 0.0), c(0.25, 0.0));
        let xi = LoopMatrix::from_modes(1, &[(-1, q), (1, q)]);
        let cl = LoopMatrix::from_fn(|l| mat2::expm(&(xi.evaluate(l).unwrap() * c(0.0, 0.3))), 96, 24).unwrap();
        let base = triple(Arc::new(Residue), LoopMatrix::identity(24));
        let hat = triple(Arc::new(Residue), cl.clone());
        let loop_path = circle_loop(c(1.0, 0.0), 48);
        let chi = compute_monodromy(&base, &loop_path, 8, 24).unwrap();
        let chi_hat = compute_monodromy(&hat, &loop_path, 8, 24).unwrap();
        let expect = cl.multiply(&chi.chi).unwrap().multiply(&cl.adjugate()).unwrap();
        assert!(chi_hat.chi.coeff_distance(&expect) < 1e-12);
    }

    #[test]
    fn unitary_certificate() {
        let t = triple(Arc::new(Residue), LoopMatrix::identity(4));
        assert!(certify_unitary_monodromy(&t, 16, 1e-12));
        let bad = DPWTriple::new(
            Arc::new(Residue),
            LoopMatrix::constant(mat2::diag(c(2.0, 0.0), c(0.5, 0.0)), 4),
            c(1.0, 0.0),
            1.0,
            c(1.0, 0.0),
        )
        .unwrap();
        assert!(!certify_unitary_monodromy(&bad, 16, 1e-12));
        // e₃-conjugation keeps the generator hermitian.
        let conj = Arc::new(ConjugatedPotential::new(Arc::new(Residue), crate::su2::e3()).unwrap());
        assert!(certify_unitary_monodromy(&triple(conj, LoopMatrix::identity(4)), 16, 1e-12));
    }

    #[test]
    fn delaunay_potential_is_certified() {
        let p = crate::delaunay::DelaunayParams::new(0.3, -0.05, 0.1875f64.sqrt()).unwrap();
        let t = crate::delaunay::delaunay_triple(&p).unwrap();
        assert!(certify_unitary_monodromy(&t, 16, 1e-12));
        #[derive(Debug)]
        struct Doubled(crate::delaunay::DelaunayPotential);
        impl Potential for Doubled {
            fn coefficient(&self, z: Complex64) -> LoopMatrix {
                self.0.coefficient(z).scaled(c(2.0, 0.0))
            }
        }
        let doubled = triple(Arc::new(Doubled(crate::delaunay::delaunay_potential(&p))), LoopMatrix::identity(1));
        assert!(certify_unitary_monodromy(&doubled, 16, 1e-12));
    }

    #[test]
    fn open_path_rejected() {
        let t = triple(Arc::new(ZeroPotential), LoopMatrix::identity(4));
        assert!(compute_monodromy(&t, &[c(1.0, 0.0), c(0.0, 1.0)], 4, 4).is_err());
    }
}
