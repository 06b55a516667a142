//! Meshes of Delaunay surfaces over the `(t, ρ)` grid, `z = e^{ρ + it}`.

pub mod export;
pub mod measure;

use std::f64::consts::PI;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::delaunay::{check_closing, cover_path, delaunay_triple, ClosingCheck, DelaunayParams};
use crate::dpw::{immerse_detailed, ImmerseOptions, DEFAULT_STEPS_PER_UNIT};
use crate::error::{Error, Result};
use crate::loop_algebra::{DEFAULT_DEGREE, DEFAULT_TOL};
use crate::monodromy::CLOSING_TOL;
use crate::su2::SU2Vector;

pub use export::{export, MeshFormat};
pub use measure::{measure, MeasurementReport};

#[derive(Clone, Copy, Debug)]
pub struct MeshOptions {
    pub t_steps: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_steps: usize,
    pub degree: usize,
    pub tol: f64,
    /// Tolerance for the closing report that decides seam welding.
    pub closing_tol: f64,
    /// Generate surfaces with `μ(1) ∈ ½ℤ`, `μ(1) ≠ 1/2`.
    pub allow_multiply_wrapped: bool,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions {
            t_steps: 128,
            rho_min: -2.0 * PI,
            rho_max: 2.0 * PI,
            rho_steps: 129,
            degree: DEFAULT_DEGREE,
            tol: DEFAULT_TOL,
            closing_tol: CLOSING_TOL,
            allow_multiply_wrapped: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshMetadata {
    pub params: DelaunayParams,
    pub degree: usize,
    pub tol: f64,
    pub closing: ClosingCheck,
    /// Whether the `t = 0` and `t = 2π` columns are welded on export.
    pub closed: bool,
    /// Sphere-limit parameters (`b = 0`): the neck pinches to a point.
    pub degenerate: bool,
    pub max_iwasawa_residual: f64,
    pub generated_at_unix: u64,
}

/// Row-major over `ρ`: entry `j·n_t + i` holds the point at `(t_i, ρ_j)`.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    pub n_t: usize,
    pub n_rho: usize,
    pub t_values: Vec<f64>,
    pub rho_values: Vec<f64>,
    pub points: Vec<SU2Vector>,
    pub normals: Vec<SU2Vector>,
    /// `r₀` with `B(0) = diag[r₀, 1/r₀]` at each point.
    pub conformal: Vec<f64>,
    pub metadata: MeshMetadata,
}

impl SurfaceMesh {
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_t + i
    }

    pub fn point(&self, i: usize, j: usize) -> SU2Vector {
        self.points[self.index(i, j)]
    }

    pub fn normal(&self, i: usize, j: usize) -> SU2Vector {
        self.normals[self.index(i, j)]
    }

    pub fn z(&self, i: usize, j: usize) -> Complex64 {
        Complex64::from_polar(self.rho_values[j].exp(), self.t_values[i])
    }

    pub fn is_closed(&self) -> bool {
        self.metadata.closed
    }

    /// Whether `t` runs over exactly `[t₀, t₀ + 2π]`, so the last column
    /// repeats the first up to the period.
    pub fn spans_period(&self) -> bool {
        self.n_t >= 2 && ((self.t_values[self.n_t - 1] - self.t_values[0]) - 2.0 * PI).abs() < 1e-12
    }

    /// The parallel surface `f + n/H`, with the opposite normal.
    pub fn parallel(&self) -> SurfaceMesh {
        let h = self.metadata.params.h;
        let mut out = self.clone();
        for (p, n) in out.points.iter_mut().zip(out.normals.iter_mut()) {
            *p = *p + *n * (1.0 / h);
            *n = -*n;
        }
        out
    }
}

pub fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect()
}

/// Immerses every grid point. Points are computed independently in parallel
/// and collected in grid order, so the output does not depend on the thread
/// count.
pub fn generate_mesh(p: &DelaunayParams, opts: &MeshOptions) -> Result<SurfaceMesh> {
    p.validate()?;
    if opts.t_steps == 0 || opts.rho_steps == 0 {
        return Err(Error::Argument("t_steps and rho_steps must be positive".into()));
    }
    if !(opts.rho_min.is_finite() && opts.rho_max.is_finite()) || opts.rho_min > opts.rho_max {
        return Err(Error::Argument(format!("bad ρ range [{}, {}]", opts.rho_min, opts.rho_max)));
    }
    let closing = check_closing(p, opts.degree, opts.closing_tol)?;
    if closing.mu1_half_integer && !closing.simply_wrapped && !opts.allow_multiply_wrapped {
        return Err(Error::Domain(format!(
            "μ(1) = {} gives a multiply wrapped surface; pass the override to generate it",
            closing.mu1
        )));
    }
    let triple = delaunay_triple(p)?;
    let iopts = ImmerseOptions {
        degree: opts.degree,
        tol: opts.tol,
        steps_per_unit: DEFAULT_STEPS_PER_UNIT,
        closed_form: true,
    };
    let n_t = opts.t_steps + 1;
    let t_values: Vec<f64> = (0..n_t).map(|i| 2.0 * PI * i as f64 / opts.t_steps as f64).collect();
    let rho_values = grid(opts.rho_min, opts.rho_max, opts.rho_steps);
    let n = n_t * rho_values.len();

    let results: Vec<Result<_>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % n_t, k / n_t);
            immerse_detailed(&triple, &cover_path(rho_values[j], t_values[i]), &iopts).map_err(|e| {
                Error::GridPoint { t_index: i, rho_index: j, source: Box::new(e) }
            })
        })
        .collect();

    let mut points = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut conformal = Vec::with_capacity(n);
    let mut max_iwasawa_residual: f64 = 0.0;
    for r in results {
        let im = r?;
        points.push(im.position);
        normals.push(im.normal);
        conformal.push(im.factors.rho());
        max_iwasawa_residual = max_iwasawa_residual.max(im.factors.residual);
    }
    if let Some(k) = points.iter().position(|v| !v.is_finite()) {
        return Err(Error::GridPoint {
            t_index: k % n_t,
            rho_index: k / n_t,
            source: Box::new(Error::Domain("non-finite immersion point".into())),
        });
    }

    let generated_at_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Ok(SurfaceMesh {
        n_t,
        n_rho: rho_values.len(),
        t_values,
        rho_values,
        points,
        normals,
        conformal,
        metadata: MeshMetadata {
            params: *p,
            degree: opts.degree,
            tol: opts.tol,
            closing,
            closed: closing.closes(),
            degenerate: p.b == Complex64::ZERO,
            max_iwasawa_residual,
            generated_at_unix,
        },
    })
}
