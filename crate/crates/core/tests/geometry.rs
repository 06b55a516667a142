use std::f64::consts::PI;

use dpw_delaunay::delaunay::{self, check_closing, delaunay_triple, DelaunayParams, SurfaceKind};
use dpw_delaunay::loop_algebra::LoopMatrix;
use dpw_delaunay::monodromy::{circle_loop, closing_conditions, compute_monodromy};
use dpw_delaunay::su2::SU2Vector;
use dpw_delaunay::surface::export::write_obj;
use dpw_delaunay::surface::{generate_mesh, measure, MeshOptions, SurfaceMesh};
use dpw_delaunay::Error;
use num_complex::Complex64;

fn opts(t_steps: usize, rho_min: f64, rho_max: f64, rho_steps: usize) -> MeshOptions {
    MeshOptions { t_steps, rho_min, rho_max, rho_steps, ..Default::default() }
}

#[test]
fn nodoid_radii_and_first_integral() {
    let p = DelaunayParams::new(0.3, -0.05, 0.1875f64.sqrt()).unwrap();
    assert_eq!(delaunay::classify(&p), SurfaceKind::Nodoid);
    let g = delaunay::geometry(&p).unwrap();
    let mesh = generate_mesh(&p, &opts(64, -2.0 * PI, 2.0 * PI, 257)).unwrap();
    assert!(mesh.is_closed());
    let r = measure(&mesh, &g).unwrap();
    assert!(r.interior_extrema);
    assert!((r.measured_neck - g.neck_radius).abs() < 1e-3, "{} vs {}", r.measured_neck, g.neck_radius);
    assert!((r.measured_bulge - g.bulge_radius).abs() < 1e-3, "{} vs {}", r.measured_bulge, g.bulge_radius);
    assert!(r.first_integral_spread < 1e-3, "{}", r.first_integral_spread);
    assert!((r.kappa_at_neck(p.h, g.classification) - 4.0 * p.ab().re).abs() < 1e-3);
    assert!(r.axis_fit_residual < 1e-6);
    assert!(r.period_closure_error < 1e-6);
}

#[test]
fn parallel_surface_swaps_neck_and_bulge() {
    let p = DelaunayParams::new(0.3, 0.2, 0.0).unwrap().with_mean_curvature(2.0).unwrap();
    let g = delaunay::geometry(&p).unwrap();
    let mesh = generate_mesh(&p, &opts(32, -2.0 * PI, 2.0 * PI, 129)).unwrap();
    let primal = measure(&mesh, &g).unwrap();
    let parallel = measure(&mesh.parallel(), &g).unwrap();
    let inv_h = 1.0 / p.h;
    assert!((parallel.measured_neck - (inv_h - primal.measured_bulge)).abs() < 1e-3);
    assert!((parallel.measured_bulge - (inv_h - primal.measured_neck)).abs() < 1e-3);
    assert!((primal.measured_neck - g.neck_radius).abs() < 1e-3);
    assert!((primal.measured_bulge - g.bulge_radius).abs() < 1e-3);
}

#[test]
fn fixed_radius_rows_are_circles_about_the_axis() {
    for (a, b, c) in [(0.3, 0.2, 0.0), (0.2, 0.05, 0.1875f64.sqrt()), (0.1, 0.15, 0.1875f64.sqrt())] {
        let p = DelaunayParams::new(a, b, c).unwrap();
        let g = delaunay::geometry(&p).unwrap();
        let mesh = generate_mesh(&p, &opts(24, -1.5, 1.5, 7)).unwrap();
        let r = measure(&mesh, &g).unwrap();
        assert!(r.axis_fit_residual < 1e-6, "({a}, {b}, {c}): {}", r.axis_fit_residual);
    }
}

#[test]
fn complex_weights_give_rotated_unduloid() {
    let theta: f64 = 1.3;
    let p = DelaunayParams::complex(Complex64::from_polar(0.3, theta), Complex64::from_polar(0.2, -theta), 0.0).unwrap();
    assert!(check_closing(&p, 32, 1e-7).unwrap().closes());
    let g = delaunay::geometry(&p).unwrap();
    let mesh = generate_mesh(&p, &opts(32, -2.0 * PI, 2.0 * PI, 129)).unwrap();
    let r = measure(&mesh, &g).unwrap();
    assert!((r.measured_neck - 0.4).abs() < 1e-3 && (r.measured_bulge - 0.6).abs() < 1e-3);
    assert!(r.axis_fit_residual < 1e-6);
}

fn obj_bytes(mesh: &SurfaceMesh) -> Vec<u8> {
    let mut buf = Vec::new();
    write_obj(mesh, &mut buf).unwrap();
    buf
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let p = DelaunayParams::new(0.3, 0.2, 0.1).unwrap();
    let o = opts(16, -1.0, 1.0, 9);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| generate_mesh(&p, &o)).unwrap();
    let b = four.install(|| generate_mesh(&p, &o)).unwrap();
    assert_eq!(obj_bytes(&a), obj_bytes(&b));
}

/// Mean curvature from the finite-difference first and second fundamental
/// forms, using the mesh normals.
#[test]
fn finite_difference_mean_curvature() {
    let p = DelaunayParams::new(0.3, 0.2, 0.0).unwrap().with_mean_curvature(1.5).unwrap();
    let mesh = generate_mesh(&p, &opts(96, -1.0, 1.0, 41)).unwrap();
    let (dt, dr) = (mesh.t_values[1] - mesh.t_values[0], mesh.rho_values[1] - mesh.rho_values[0]);
    let cols = mesh.n_t - 1;
    let at = |i: usize, j: usize| mesh.point(i % cols, j);
    let mut worst: f64 = 0.0;
    for j in (2..mesh.n_rho - 2).step_by(5) {
        for i in (cols..2 * cols).step_by(11) {
            let ft = (at(i + 1, j) - at(i - 1, j)) * (0.5 / dt);
            let fr = (at(i, j + 1) - at(i, j - 1)) * (0.5 / dr);
            let ftt = (at(i + 1, j) - at(i, j) * 2.0 + at(i - 1, j)) * (1.0 / (dt * dt));
            let frr = (at(i, j + 1) - at(i, j) * 2.0 + at(i, j - 1)) * (1.0 / (dr * dr));
            let frt = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) * (0.25 / (dt * dr));
            let n: SU2Vector = mesh.normal(i % cols, j);
            let (e, f, g) = (fr.dot(&fr), fr.dot(&ft), ft.dot(&ft));
            let (l, m, nn) = (frr.dot(&n), frt.dot(&n), ftt.dot(&n));
            let h = (l * g - 2.0 * m * f + nn * e) / (2.0 * (e * g - f * f));
            worst = worst.max((h.abs() - p.h).abs() / p.h);
        }
    }
    assert!(worst < 1e-2, "relative mean curvature error {worst}");
}

#[test]
fn integrated_monodromy_matches_closed_form() {
    for (a, b, c) in [(0.25, 0.25, 0.0), (0.3, -0.05, 0.1875f64.sqrt()), (0.3, 0.3, 0.0)] {
        let p = DelaunayParams::new(a, b, c).unwrap();
        let chi = compute_monodromy(&delaunay_triple(&p).unwrap(), &circle_loop(Complex64::from(1.0), 256), 4, 32).unwrap();
        let exact = delaunay::closed_form_monodromy(&p, 32);
        assert!(chi.chi.circle_distance(&exact.chi, 64) < 1e-9);
        let r1 = closing_conditions(&chi, p.lambda0, 1e-7).unwrap();
        let r2 = check_closing(&p, 32, 1e-7).unwrap().report;
        assert_eq!(r1.passes, r2.passes);
    }
}

#[test]
fn lambda0_away_from_one() {
    // At λ₀ = −1 the surface is the e₁ half-turn of the λ₀ = 1 surface.
    let p = DelaunayParams::new(0.3, 0.2, 0.1).unwrap();
    let q = p.with_lambda0_arg(PI).unwrap();
    let o = opts(8, -0.5, 0.5, 3);
    let (m, n) = (generate_mesh(&p, &o).unwrap(), generate_mesh(&q, &o).unwrap());
    for k in 0..m.points.len() {
        assert!(n.points[k].max_abs_diff(&m.points[k].rotated_about_e1()) < 1e-12);
    }
    let gp = delaunay::axis_and_circle(&p).unwrap();
    let gq = delaunay::axis_and_circle(&q).unwrap();
    assert!(gq.circle_center.max_abs_diff(&gp.circle_center.rotated_about_e1()) < 1e-12);
}

#[test]
fn generic_lambda0_has_no_closed_form_circle() {
    // Away from λ₀ = ±1 the image of |z| = 1 is a helix, not a circle.
    let p = DelaunayParams::new(0.3, 0.2, 0.0).unwrap().with_lambda0_arg(0.7).unwrap();
    assert!(matches!(delaunay::axis_and_circle(&p), Err(Error::Domain(_))));
    assert!(!check_closing(&p, 32, 1e-7).unwrap().closes());
}

#[test]
fn iwasawa_failure_names_grid_point() {
    let p = DelaunayParams::new(0.3, 0.2, 0.0).unwrap();
    let o = MeshOptions { tol: 1e-18, ..opts(4, 2.0, 3.0, 2) };
    match generate_mesh(&p, &o) {
        Err(Error::GridPoint { t_index, rho_index, source }) => {
            assert_eq!((t_index, rho_index), (0, 0));
            assert!(source.residual().is_some(), "{source}");
        }
        other => panic!("expected a grid point error, got {other:?}"),
    }
}

#[test]
fn measurement_rejects_degenerate_meshes() {
    let p = DelaunayParams::new(0.3, 0.2, 0.0).unwrap();
    let g = delaunay::geometry(&p).unwrap();
    let mesh = generate_mesh(&p, &opts(8, -1.0, 1.0, 3)).unwrap();
    assert!(matches!(measure(&mesh, &g), Err(Error::Measurement(_))));
}

#[test]
fn golden_loop_dump() {
    let p = DelaunayParams::new(0.3, 0.2, 0.0).unwrap();
    let golden: serde_json::Value = serde_json::from_str(include_str!("golden/xi_unduloid.json")).unwrap();
    let dumped = serde_json::to_value(p.xi_minus_one()).unwrap();
    assert_eq!(dumped, golden);
    let back: LoopMatrix = serde_json::from_value(golden).unwrap();
    assert_eq!(back, p.xi_minus_one());
}
