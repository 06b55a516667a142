//! Geometric measurements of a generated mesh against the predicted
//! Delaunay geometry.

use serde::Serialize;

use super::SurfaceMesh;
use crate::delaunay::{profile_first_integral, DelaunayGeometry, SurfaceKind};
use crate::error::{Error, Result};
use crate::su2::SU2Vector;

#[derive(Clone, Debug, Serialize)]
pub struct MeasurementReport {
    pub measured_neck: f64,
    pub measured_bulge: f64,
    /// Largest spread over `t` of the axis distance in one `ρ`-row.
    pub axis_fit_residual: f64,
    /// `max s − min s` along the extracted profile.
    pub first_integral_spread: f64,
    /// Largest distance between the `t = 0` and `t = 2π` columns.
    pub period_closure_error: f64,
    /// Both extrema were found strictly inside the `ρ`-window.
    pub interior_extrema: bool,
    pub profile: Vec<ProfileSample>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfileSample {
    pub rho: f64,
    /// Mean distance to the axis.
    pub r: f64,
    /// Mean coordinate along the axis.
    pub x: f64,
}

impl MeasurementReport {
    /// `κ = r(1 − rH)` at the measured neck. The nodoid neck sits on the
    /// inner loop, where the signed radius is `−r`.
    pub fn kappa_at_neck(&self, h: f64, kind: SurfaceKind) -> f64 {
        let r = if kind == SurfaceKind::Nodoid { -self.measured_neck } else { self.measured_neck };
        r * (1.0 - r * h.abs())
    }
}

/// Distance of `p` to the line through `center` along the unit `axis`, and
/// its coordinate along the line.
pub fn axis_coordinates(p: &SU2Vector, center: &SU2Vector, axis: &SU2Vector) -> (f64, f64) {
    let d = *p - *center;
    let x = d.dot(axis);
    ((d - *axis * x).norm(), x)
}

fn d1_fourth_order(f: &[f64], k: usize, step: f64) -> f64 {
    (-f[k + 2] + 8.0 * f[k + 1] - 8.0 * f[k - 1] + f[k - 2]) / (12.0 * step)
}

/// Vertex value of the parabola through three equally spaced samples.
fn parabolic_extremum(l: f64, m: f64, r: f64) -> f64 {
    let curv = l - 2.0 * m + r;
    if curv.abs() < 1e-300 {
        return m;
    }
    m - (r - l) * (r - l) / (8.0 * curv)
}

fn refined_extremum(r: &[f64], k: usize) -> f64 {
    if k == 0 || k + 1 == r.len() {
        r[k]
    } else {
        parabolic_extremum(r[k - 1], r[k], r[k + 1])
    }
}

pub fn measure(mesh: &SurfaceMesh, geometry: &DelaunayGeometry) -> Result<MeasurementReport> {
    if !mesh.spans_period() || mesh.n_t < 4 {
        return Err(Error::Measurement("mesh must cover a full period in t with at least 3 columns".into()));
    }
    if mesh.n_rho < 5 {
        return Err(Error::Measurement("profile extraction needs at least 5 ρ-rows".into()));
    }
    let axis = geometry
        .axis_direction
        .normalized()
        .ok_or_else(|| Error::Measurement("zero axis direction".into()))?;
    let center = geometry.circle_center;
    let cols = mesh.n_t - 1;

    let mut profile = Vec::with_capacity(mesh.n_rho);
    let mut axis_fit_residual: f64 = 0.0;
    let mut period_closure_error: f64 = 0.0;
    for j in 0..mesh.n_rho {
        let (mut sum_r, mut sum_x) = (0.0, 0.0);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..cols {
            let (r, x) = axis_coordinates(&mesh.point(i, j), &center, &axis);
            sum_r += r;
            sum_x += x;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        axis_fit_residual = axis_fit_residual.max(hi - lo);
        period_closure_error = period_closure_error.max(mesh.point(0, j).distance(&mesh.point(cols, j)));
        profile.push(ProfileSample { rho: mesh.rho_values[j], r: sum_r / cols as f64, x: sum_x / cols as f64 });
    }
    if profile.iter().any(|s| !s.r.is_finite() || !s.x.is_finite()) {
        return Err(Error::Measurement("non-finite profile".into()));
    }

    let r: Vec<f64> = profile.iter().map(|s| s.r).collect();
    let x: Vec<f64> = profile.iter().map(|s| s.x).collect();
    // Ties resolve to the first index so the result is order-deterministic.
    let argmin = (0..r.len()).fold(0, |b, k| if r[k] < r[b] { k } else { b });
    let argmax = (0..r.len()).fold(0, |b, k| if r[k] > r[b] { k } else { b });
    let interior = |k: usize| k > 0 && k + 1 < r.len();
    let measured_neck = refined_extremum(&r, argmin).max(0.0);
    let measured_bulge = refined_extremum(&r, argmax);

    // Slope dr/dx of the profile as a graph over the axis, with the sign of
    // dx/dρ tracked so that nodoid loops keep a signed tangent angle.
    let step = mesh.rho_values[1] - mesh.rho_values[0];
    let h = mesh.metadata.params.h.abs();
    let mut dx = Vec::new();
    let mut dr = Vec::new();
    for k in 2..mesh.n_rho - 2 {
        dx.push(d1_fourth_order(&x, k, step));
        dr.push(d1_fourth_order(&r, k, step));
    }
    let orientation = if dx.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let s: Vec<f64> = (0..dx.len())
        .map(|k| {
            let rk = r[k + 2];
            let speed = dx[k].hypot(dr[k]);
            if speed == 0.0 {
                return rk - h * rk * rk;
            }
            let cos = orientation * dx[k] / speed;
            if cos >= 0.0 {
                profile_first_integral(rk, dr[k] / dx[k].abs().max(f64::MIN_POSITIVE), h)
            } else {
                // Inner loop of a nodoid: the tangent points backwards along the axis.
                rk * cos - h * rk * rk
            }
        })
        .collect();
    let first_integral_spread = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - s.iter().cloned().fold(f64::INFINITY, f64::min);

    Ok(MeasurementReport {
        measured_neck,
        measured_bulge,
        axis_fit_residual,
        first_integral_spread,
        period_closure_error,
        interior_extrema: interior(argmin) && interior(argmax),
        profile,
    })
}

/// Finite-difference first fundamental form against `4r₀⁴|a|²/H²`, both in
/// the `z`-chart.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MetricSample {
    pub t_index: usize,
    pub rho_index: usize,
    /// `|f_ρ|²/|z|²`.
    pub e: f64,
    /// `|f_t|²/|z|²`.
    pub g: f64,
    /// `⟨f_ρ, f_t⟩/|z|²`.
    pub f: f64,
    pub predicted: f64,
    pub relative_error: f64,
}

pub fn metric_samples(mesh: &SurfaceMesh, at: &[(usize, usize)]) -> Result<Vec<MetricSample>> {
    if !mesh.spans_period() || mesh.n_t < 6 || mesh.n_rho < 5 {
        return Err(Error::Measurement("metric check needs a periodic grid with at least 5×5 points".into()));
    }
    let cols = mesh.n_t - 1;
    let dt = mesh.t_values[1] - mesh.t_values[0];
    let drho = mesh.rho_values[1] - mesh.rho_values[0];
    let p = &mesh.metadata.params;
    at.iter()
        .map(|&(i, j)| {
            if i >= cols || j < 2 || j + 2 >= mesh.n_rho {
                return Err(Error::Measurement(format!("grid point ({i}, {j}) has no interior stencil")));
            }
            let wrap = |o: isize| ((i as isize + o).rem_euclid(cols as isize)) as usize;
            let ft = (mesh.point(wrap(-2), j) - mesh.point(wrap(2), j)
                + (mesh.point(wrap(1), j) - mesh.point(wrap(-1), j)) * 8.0)
                * (1.0 / (12.0 * dt));
            let fr = (mesh.point(i, j - 2) - mesh.point(i, j + 2)
                + (mesh.point(i, j + 1) - mesh.point(i, j - 1)) * 8.0)
                * (1.0 / (12.0 * drho));
            let z2 = mesh.z(i, j).norm_sqr();
            let r0 = mesh.conformal[mesh.index(i, j)];
            let predicted = 4.0 * r0.powi(4) * p.a.norm_sqr() / (p.h * p.h * z2);
            let (e, g, f) = (fr.dot(&fr) / z2, ft.dot(&ft) / z2, fr.dot(&ft) / z2);
            let relative_error = ((e - predicted).abs().max((g - predicted).abs()) + f.abs()) / predicted;
            Ok(MetricSample { t_index: i, rho_index: j, e, g, f, predicted, relative_error })
        })
        .collect()
}
