use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use dpw_delaunay::delaunay::{self, check_closing, ClosingCheck, DelaunayParams, ParamsFile};
use dpw_delaunay::dpw::DEFAULT_STEPS_PER_UNIT;
use dpw_delaunay::loop_algebra::{DEFAULT_DEGREE, DEFAULT_TOL};
use dpw_delaunay::monodromy::{circle_loop, closing_conditions, compute_monodromy, CLOSING_TOL};
use dpw_delaunay::surface::{export, generate_mesh, measure, MeshFormat, MeshOptions};
use dpw_delaunay::LoopMatrix;

/// Delaunay constant mean curvature surfaces from loop-group data.
#[derive(Parser)]
#[command(name = "dpw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh and write it to --out.
    Generate(GenerateArgs),
    /// Report the closing conditions.
    Check(ParamArgs),
    /// Report predicted neck and bulge radii and the classification.
    Radii(ParamArgs),
    /// Integrate the frame around z = 0 and report the monodromy.
    Monodromy(MonodromyArgs),
    /// Run a small end-to-end check and print its diagnostics.
    Selftest,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// JSON file with keys a, b, c, H, lambda0_arg; flags override it.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Weight a, as `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Weight b, as `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Mean curvature.
    #[arg(long = "H", allow_hyphen_values = true)]
    h: Option<f64>,
    #[arg(long = "lambda0-arg", allow_hyphen_values = true)]
    lambda0_arg: Option<f64>,
    /// Fourier truncation N.
    #[arg(long, default_value_t = DEFAULT_DEGREE)]
    fourier: usize,
    /// Closing tolerance.
    #[arg(long, default_value_t = CLOSING_TOL)]
    tol: f64,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 128)]
    t_steps: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = -2.0 * PI)]
    rho_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 2.0 * PI)]
    rho_max: f64,
    #[arg(long, default_value_t = 129)]
    rho_steps: usize,
    /// Iwasawa residual tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    iwasawa_tol: f64,
    /// obj, ply or csv.
    #[arg(long, default_value = "obj")]
    format: String,
    #[arg(long)]
    out: PathBuf,
    /// Write the parallel surface instead.
    #[arg(long)]
    parallel: bool,
    /// Allow μ(1) ∈ ½ℤ other than 1/2.
    #[arg(long)]
    allow_multiply_wrapped: bool,
}

#[derive(Args)]
struct MonodromyArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Chords of the loop |z| = 1.
    #[arg(long, default_value_t = 256)]
    segments: usize,
    /// RK4 steps per chord.
    #[arg(long, default_value_t = 4)]
    steps: usize,
    /// Include the coefficients of χ in the output.
    #[arg(long)]
    dump: bool,
}

fn parse_weight(s: &str) -> anyhow::Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().with_context(|| format!("bad number {t:?}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => bail!("expected `re` or `re,im`, got {s:?}"),
    }
}

impl ParamArgs {
    fn resolve(&self) -> anyhow::Result<DelaunayParams> {
        let base = match &self.params {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Some(ParamsFile::from_json(&text)?)
            }
            None => None,
        };
        let a = match (&self.a, &base) {
            (Some(s), _) => parse_weight(s)?,
            (None, Some(p)) => p.a,
            (None, None) => bail!("--a is required without --params"),
        };
        let b = match (&self.b, &base) {
            (Some(s), _) => parse_weight(s)?,
            (None, Some(p)) => p.b,
            (None, None) => bail!("--b is required without --params"),
        };
        let c = self.c.or(base.map(|p| p.c)).unwrap_or(0.0);
        let h = self.h.or(base.map(|p| p.h)).unwrap_or(1.0);
        let arg = self.lambda0_arg.or(base.map(|p| p.lambda0.arg())).unwrap_or(0.0);
        Ok(DelaunayParams::complex(a, b, c)?.with_mean_curvature(h)?.with_lambda0_arg(arg)?)
    }
}

#[derive(Serialize)]
struct CheckReport {
    cond1_residual: f64,
    cond1_sign: i8,
    cond2_residual: f64,
    mu1: f64,
    passes: [bool; 2],
    closes: bool,
    simply_wrapped: bool,
    ab_real: bool,
    elliptic_cylinder: bool,
    consistent: bool,
}

impl From<&ClosingCheck> for CheckReport {
    fn from(c: &ClosingCheck) -> Self {
        CheckReport {
            cond1_residual: c.report.cond1_residual,
            cond1_sign: c.report.cond1_sign,
            cond2_residual: c.report.cond2_residual,
            mu1: c.mu1,
            passes: c.report.passes,
            closes: c.closes(),
            simply_wrapped: c.simply_wrapped,
            ab_real: c.ab_real,
            elliptic_cylinder: c.elliptic_cylinder,
            consistent: c.consistent,
        }
    }
}

#[derive(Serialize)]
struct RadiiReport {
    classification: &'static str,
    neck: Option<f64>,
    bulge: Option<f64>,
    kappa: f64,
    hopf_coefficient: [f64; 2],
    axis_direction: Option<[f64; 3]>,
    circle_center: Option<[f64; 3]>,
    circle_radius: Option<f64>,
    cos_theta: Option<f64>,
}

#[derive(Serialize)]
struct GenerateReport {
    out: String,
    format: String,
    points: usize,
    closed: bool,
    degenerate: bool,
    classification: &'static str,
    neck: Option<f64>,
    bulge: Option<f64>,
    measured_neck: Option<f64>,
    measured_bulge: Option<f64>,
    s_spread: Option<f64>,
    closure_error: Option<f64>,
    axis_fit_residual: Option<f64>,
    interior_extrema: Option<bool>,
    max_iwasawa_residual: f64,
    #[serde(flatten)]
    closing: CheckReport,
}

#[derive(Serialize)]
struct MonodromyReport {
    generator: String,
    #[serde(flatten)]
    closing: CheckReport,
    unitarity_defect: f64,
    closed_form_distance: f64,
    chi: Option<LoopMatrix>,
}

fn print_json<T: Serialize>(v: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

/// 0 when the closing conditions hold, 2 otherwise.
fn closing_code(closes: bool) -> ExitCode {
    if closes {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn check(args: &ParamArgs) -> anyhow::Result<ExitCode> {
    let p = args.resolve()?;
    let chk = check_closing(&p, args.fourier, args.tol)?;
    print_json(&CheckReport::from(&chk))?;
    Ok(closing_code(chk.closes()))
}

fn radii(args: &ParamArgs) -> anyhow::Result<ExitCode> {
    let p = args.resolve()?;
    let radii = delaunay::neck_bulge_radii(&p).ok();
    let ac = delaunay::axis_and_circle(&p).ok();
    let q = dpw_delaunay::dpw::hopf_coefficient(p.a, p.b);
    print_json(&RadiiReport {
        classification: delaunay::classify(&p).as_str(),
        neck: radii.map(|r| r.0),
        bulge: radii.map(|r| r.1),
        kappa: 4.0 * p.ab().re / p.h,
        hopf_coefficient: [q.re, q.im],
        axis_direction: ac.map(|g| g.axis_direction.0),
        circle_center: ac.map(|g| g.circle_center.0),
        circle_radius: ac.map(|g| g.circle_radius),
        cos_theta: ac.map(|g| g.cos_theta),
    })?;
    Ok(if radii.is_some() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn monodromy(args: &MonodromyArgs) -> anyhow::Result<ExitCode> {
    let p = args.params.resolve()?;
    let triple = delaunay::delaunay_triple(&p)?;
    let n = args.params.fourier;
    let chi = compute_monodromy(&triple, &circle_loop(Complex64::from(1.0), args.segments), args.steps, n)?;
    let report = closing_conditions(&chi, p.lambda0, args.params.tol)?;
    let mut chk = check_closing(&p, n, args.params.tol)?;
    chk.report = report;
    let samples = chi.chi.default_sample_count();
    let closed_form_distance = chi.chi.circle_distance(&delaunay::closed_form_monodromy(&p, n).chi, samples);
    print_json(&MonodromyReport {
        generator: chi.generator.clone(),
        closing: CheckReport::from(&chk),
        unitarity_defect: chi.chi.unitarity_defect(samples),
        closed_form_distance,
        chi: args.dump.then(|| chi.chi.clone()),
    })?;
    Ok(closing_code(report.closes()))
}

fn generate(args: &GenerateArgs) -> anyhow::Result<ExitCode> {
    let p = args.params.resolve()?;
    let format: MeshFormat = args.format.parse()?;
    let opts = MeshOptions {
        t_steps: args.t_steps,
        rho_min: args.rho_min,
        rho_max: args.rho_max,
        rho_steps: args.rho_steps,
        degree: args.params.fourier,
        tol: args.iwasawa_tol,
        closing_tol: args.params.tol,
        allow_multiply_wrapped: args.allow_multiply_wrapped,
    };
    let mut mesh = generate_mesh(&p, &opts)?;
    let geometry = delaunay::geometry(&p).ok();
    let measured = geometry.as_ref().and_then(|g| measure(&mesh, g).ok());
    if args.parallel {
        mesh = mesh.parallel();
    }
    export(&mesh, format, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    let closes = mesh.metadata.closing.closes();
    print_json(&GenerateReport {
        out: args.out.display().to_string(),
        format: args.format.to_ascii_lowercase(),
        points: mesh.points.len(),
        closed: mesh.is_closed(),
        degenerate: mesh.metadata.degenerate,
        classification: delaunay::classify(&p).as_str(),
        neck: geometry.map(|g| g.neck_radius),
        bulge: geometry.map(|g| g.bulge_radius),
        measured_neck: measured.as_ref().map(|m| m.measured_neck),
        measured_bulge: measured.as_ref().map(|m| m.measured_bulge),
        s_spread: measured.as_ref().map(|m| m.first_integral_spread),
        closure_error: measured.as_ref().map(|m| m.period_closure_error),
        axis_fit_residual: measured.as_ref().map(|m| m.axis_fit_residual),
        interior_extrema: measured.as_ref().map(|m| m.interior_extrema),
        max_iwasawa_residual: mesh.metadata.max_iwasawa_residual,
        closing: CheckReport::from(&mesh.metadata.closing),
    })?;
    Ok(closing_code(closes))
}

#[derive(Serialize)]
struct SelftestItem {
    name: String,
    value: f64,
    limit: f64,
    pass: bool,
}

fn selftest() -> anyhow::Result<ExitCode> {
    let mut items = Vec::new();
    let mut push = |name: String, value: f64, limit: f64| {
        items.push(SelftestItem { name, value, limit, pass: value <= limit })
    };

    let cyl = DelaunayParams::new(0.25, 0.25, 0.0)?;
    let und = DelaunayParams::new(0.3, 0.2, 0.0)?;
    let opts = MeshOptions { t_steps: 32, rho_steps: 65, ..Default::default() };
    for (name, p) in [("cylinder", cyl), ("unduloid", und)] {
        let mesh = generate_mesh(&p, &opts)?;
        let g = delaunay::geometry(&p)?;
        let m = measure(&mesh, &g)?;
        let label = |s: &str| format!("{name} {s}");
        push(label("max Iwasawa residual"), mesh.metadata.max_iwasawa_residual, DEFAULT_TOL);
        push(label("neck error"), (m.measured_neck - g.neck_radius).abs(), 1e-3);
        push(label("bulge error"), (m.measured_bulge - g.bulge_radius).abs(), 1e-3);
        push(label("first integral spread"), m.first_integral_spread, 1e-3);
        push(label("period closure"), m.period_closure_error, 1e-6);
        let chk = check_closing(&p, DEFAULT_DEGREE, CLOSING_TOL)?;
        push(label("closing residual"), chk.report.cond1_residual.max(chk.report.cond2_residual), CLOSING_TOL);
    }
    let triple = delaunay::delaunay_cover_triple(&und)?;
    let path = delaunay::cover_chart_path(0.8, 2.0);
    let rk4 = dpw_delaunay::dpw::integrate_frame_density(&triple, &path, DEFAULT_STEPS_PER_UNIT, DEFAULT_DEGREE)?;
    let exact = delaunay::closed_form_frame(&und, Complex64::new(0.8, 2.0), DEFAULT_DEGREE);
    push("RK4 vs closed-form frame".into(), rk4.circle_distance(&exact, 64), 1e-8);

    let all = items.iter().all(|i| i.pass);
    print_json(&serde_json::json!({ "pass": all, "items": items }))?;
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Check(a) => check(a),
        Command::Radii(a) => radii(a),
        Command::Monodromy(a) => monodromy(a),
        Command::Selftest => selftest(),
    }
}

fn main() -> ExitCode {
    // Usage errors exit with 1; 2 is reserved for closing failures.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
