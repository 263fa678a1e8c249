//! Command-line front end. Exit codes: 0 success, 1 a certificate or residual
//! above tolerance, 2 usage or data error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};

use crate::bianchi::{bianchi_cube, bianchi_quad, quad_cross_ratios};
use crate::cmc::{
    cmc_linear_cq, is_christoffel_pair_mixed_area, mean_curvature, NetField, TangentPlaneCongruence,
};
use crate::curves::{make_curve, Family, Grid, PolarizedCurve};
use crate::darboux::{
    integrate_parallel_section, integrate_riccati, is_darboux_pair, lift_curve, parallel_section_along,
};
use crate::error::{Error, Result};
use crate::fixtures::{cmc_cylinder, fixture_grid, named_surface, unit_circle, SURFACE_FIXTURES};
use crate::io::{curve_to_string, read_document, surface_to_string, write_obj, Document};
use crate::minkowski::{euclidean_lift, Frame};
use crate::numerics::{relative_spread, StepPolicy};
use crate::surface::{
    build_surface, check_isothermic, moutard_lift, surface_calapso, surface_christoffel, SemiDiscreteSurface,
};
use crate::transforms::{calapso_curve, christoffel_dual, MetricCorrection};
use crate::verify::{parse_override, verify_curve, verify_surface, Report, VerifyOptions};

#[derive(Parser, Debug)]
#[command(name = "isothermic", version, about = "Transformations of polarized curves and semi-discrete isothermic surfaces")]
struct Cli {
    /// RK4 stepping: `grid` or `substep:k`.
    #[arg(long, global = true, default_value = "grid")]
    step_policy: StepPolicy,
    /// Tolerance override `check=value`; a suite name applies to all its checks.
    #[arg(long = "tol-override", global = true, value_parser = parse_override)]
    tol_override: Vec<(String, f64)>,
    /// Calapso re-orthogonalization: `on`, `off` or `every:k`.
    #[arg(long, global = true, default_value = "every:50")]
    metric_correction: MetricCorrection,
    /// Seed for randomized constructions.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a curve from a family, or a named fixture.
    Curve(CurveArgs),
    /// Single Darboux transform of a curve.
    Darboux(DarbouxArgs),
    /// Bianchi quadrilateral or cube over a curve.
    Bianchi(BianchiArgs),
    /// Build, check or Moutard-lift a surface.
    Surface {
        #[command(subcommand)]
        action: SurfaceAction,
    },
    /// Christoffel dual of a curve or surface.
    Dual(IoArgs),
    /// Calapso transform of a curve or surface.
    Calapso(CalapsoArgs),
    /// Mixed area, mean curvature and conserved-quantity certificates.
    Cmc(CmcArgs),
    /// Run invariant suites and print the residual table.
    Verify(VerifyArgs),
    /// Export a surface as an OBJ mesh or its verification report as CSV.
    Export(ExportArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FamilyKind {
    Circle,
    Helix,
    Line,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[arg(long, value_enum, conflicts_with = "fixture")]
    family: Option<FamilyKind>,
    /// `unit-circle` or one of the surface fixtures.
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pitch: f64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// `s0:s1:N`.
    #[arg(long, default_value = "0:1.5:1501", allow_hyphen_values = true)]
    grid: String,
    /// Constant polarization.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    m: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Route {
    Linear,
    Riccati,
}

#[derive(Args, Debug)]
struct DarbouxArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    /// Initial point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    init: String,
    #[arg(long, value_enum, default_value = "linear")]
    route: Route,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Certify the pair and print the fitted parameter.
    #[arg(long)]
    report: bool,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args, Debug)]
struct BianchiArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Two (quad) or three (cube) parameters, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    mu: String,
    /// One initial point per parameter; random points from `--seed` if omitted.
    #[arg(long, allow_hyphen_values = true)]
    init: Vec<String>,
    /// Repeat the cube over this many random seeds.
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// For quads: write the surface `x_0, x_01, x_1`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
enum SurfaceAction {
    /// Seed curve followed by Darboux layers `mu:x,y`.
    Build {
        #[arg(long = "seed-curve")]
        seed_curve: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        layer: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Isothermicity certificate per edge.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Moutard lift residuals.
    Moutard {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Args, Debug)]
struct IoArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CalapsoArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CmcArgs {
    /// Surface JSON; requires `--normals`.
    #[arg(long = "in", conflicts_with = "fixture")]
    input: Option<PathBuf>,
    /// JSON list of per-curve lists of Euclidean unit normals.
    #[arg(long, requires = "input")]
    normals: Option<PathBuf>,
    /// Built-in round cylinder (`cmc-cylinder`).
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, conflicts_with = "curve")]
    surface: Option<PathBuf>,
    #[arg(long)]
    curve: Option<PathBuf>,
    /// `all` or suite names, comma separated.
    #[arg(long, default_value = "all", value_delimiter = ',')]
    suite: Vec<String>,
    /// Also write the report as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ExportFormat {
    Obj,
    Csv,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: ExportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Outcome of a successful command run.
enum Status {
    Ok,
    Failed,
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(Status::Ok) => 0,
        Ok(Status::Failed) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<Status> {
    let ctx = Context {
        policy: cli.step_policy,
        correction: cli.metric_correction,
        seed: cli.seed,
        overrides: cli.tol_override.into_iter().collect(),
    };
    match cli.command {
        Command::Curve(a) => cmd_curve(a),
        Command::Darboux(a) => cmd_darboux(&ctx, a),
        Command::Bianchi(a) => cmd_bianchi(&ctx, a),
        Command::Surface { action } => cmd_surface(&ctx, action),
        Command::Dual(a) => cmd_dual(&ctx, a),
        Command::Calapso(a) => cmd_calapso(&ctx, a),
        Command::Cmc(a) => cmd_cmc(a),
        Command::Verify(a) => cmd_verify(&ctx, a),
        Command::Export(a) => cmd_export(&ctx, a),
    }
}

struct Context {
    policy: StepPolicy,
    correction: MetricCorrection,
    seed: u64,
    overrides: std::collections::BTreeMap<String, f64>,
}

impl Context {
    fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            overrides: self.overrides.clone(),
            policy: self.policy,
            ..VerifyOptions::default()
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text.as_bytes())?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidInput(format!("bad number {v:?} in {text:?}")))
        })
        .collect()
}

fn parse_grid(text: &str) -> Result<Grid> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::InvalidInput(format!("grid {text:?} is not s0:s1:N"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let s0: f64 = parts[0].parse().map_err(|_| bad())?;
    let s1: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    Grid::new(s0, s1, n)
}

fn load_curve(path: &Path) -> Result<PolarizedCurve> {
    match read_document(path)? {
        Document::Curve(c) => Ok(c),
        Document::Surface(_) => Err(Error::InvalidInput(format!("{} holds a surface, not a curve", path.display()))),
    }
}

fn load_surface(path: &Path) -> Result<SemiDiscreteSurface> {
    match read_document(path)? {
        Document::Surface(s) => Ok(s),
        Document::Curve(c) => SemiDiscreteSurface::new(vec![c], vec![]),
    }
}

fn cmd_curve(a: CurveArgs) -> Result<Status> {
    if let Some(name) = a.fixture.as_deref() {
        let text = if name == "unit-circle" {
            curve_to_string(&unit_circle(fixture_grid()))?
        } else {
            surface_to_string(&named_surface(name)?)?
        };
        emit(a.out.as_deref(), &text)?;
        return Ok(Status::Ok);
    }
    let grid = parse_grid(&a.grid)?;
    let family = match a.family {
        Some(FamilyKind::Circle) | None => Family::Circle {
            radius: a.radius,
            dim: a.dim,
        },
        Some(FamilyKind::Helix) => Family::Helix {
            radius: a.radius,
            pitch: a.pitch,
        },
        Some(FamilyKind::Line) => Family::Line { dim: a.dim },
    };
    let c = make_curve(&family, grid)?;
    let c = c.with_m(vec![a.m; grid.len()])?;
    emit(a.out.as_deref(), &curve_to_string(&c)?)?;
    Ok(Status::Ok)
}

fn cmd_darboux(ctx: &Context, a: DarbouxArgs) -> Result<Status> {
    let c = load_curve(&a.input)?;
    let start = parse_list(&a.init)?;
    let layer = match a.route {
        Route::Linear => {
            let sec = integrate_parallel_section(&c, a.mu, &start, ctx.policy)?;
            sec.to_curve(&Frame::canonical(c.n()), c.m())?
        }
        Route::Riccati => integrate_riccati(&c, a.mu, &start, ctx.policy)?,
    };
    let mut status = Status::Ok;
    if a.report {
        let rep = is_darboux_pair(&c, &layer, c.m(), a.tol)?;
        let ok = rep.passed && (rep.mu - a.mu).abs() <= a.tol * a.mu.abs().max(1.0);
        eprintln!(
            "darboux: fitted mu = {:.9}, cr*m residual = {:.3e}, reality = {:.3e}: {}",
            rep.mu,
            rep.residual,
            rep.reality,
            if ok { "pass" } else { "FAIL" }
        );
        if !ok {
            status = Status::Failed;
        }
    }
    emit(a.out.as_deref(), &curve_to_string(&layer)?)?;
    Ok(status)
}

fn random_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        if p.iter().map(|v| v * v).sum::<f64>().sqrt() > 0.2 {
            return p;
        }
    }
}

fn cmd_bianchi(ctx: &Context, a: BianchiArgs) -> Result<Status> {
    let c = load_curve(&a.input)?;
    let mus = parse_list(&a.mu)?;
    if !(2..=3).contains(&mus.len()) {
        return Err(Error::InvalidInput("give two (quad) or three (cube) parameters".into()));
    }
    if !a.init.is_empty() && a.init.len() != mus.len() {
        return Err(Error::InvalidInput("give one initial point per parameter".into()));
    }
    let frame = Frame::canonical(c.n());
    let lift = lift_curve(&c, &frame)?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(ctx.seed);
    let trials = if a.init.is_empty() { a.trials.max(1) } else { 1 };
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let points = if a.init.is_empty() {
            (0..mus.len()).map(|_| random_point(&mut rng, c.n())).collect::<Vec<_>>()
        } else {
            a.init.iter().map(|p| parse_list(p)).collect::<Result<Vec<_>>>()?
        };
        let sections = mus
            .iter()
            .zip(&points)
            .map(|(mu, p)| parallel_section_along(&lift, c.m(), *mu, &euclidean_lift(p, &frame)?, &frame, ctx.policy))
            .collect::<Result<Vec<_>>>()?;
        if mus.len() == 2 {
            let xi01 = bianchi_quad(&lift, &sections[0], &sections[1], mus[0], mus[1])?;
            let cr = quad_cross_ratios(&lift, &sections[0], &xi01, &sections[1])?;
            let (centre, spread) = relative_spread(&cr);
            let target = mus[1] / mus[0];
            let dev = ((centre - target) / target).abs().max(spread);
            worst = worst.max(dev);
            eprintln!("quad {trial}: cross ratio {centre:.12} (expected {target:.12}), spread {spread:.3e}");
            if let Some(out) = a.out.as_deref() {
                let curves = [&sections[0], &xi01, &sections[1]]
                    .iter()
                    .map(|s| s.to_curve(&frame, c.m()))
                    .collect::<Result<Vec<_>>>()?;
                let s = SemiDiscreteSurface::new(curves, vec![mus[1], mus[0]])?;
                emit(Some(out), &surface_to_string(&s)?)?;
            }
        } else {
            let cube = bianchi_cube(
                &lift,
                [(&sections[0], mus[0]), (&sections[1], mus[1]), (&sections[2], mus[2])],
            )?;
            eprintln!("cube {trial}: route discrepancy {:.3e}", cube.route_discrepancy);
            worst = worst.max(cube.route_discrepancy);
        }
    }
    let ok = worst <= a.tol;
    eprintln!("bianchi: worst residual {worst:.3e}: {}", if ok { "pass" } else { "FAIL" });
    Ok(if ok { Status::Ok } else { Status::Failed })
}

fn parse_layer(text: &str) -> Result<(f64, Vec<f64>)> {
    let (mu, p) = text
        .split_once(':')
        .ok_or_else(|| Error::InvalidInput(format!("layer {text:?} is not mu:x,y")))?;
    let mu = mu
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidInput(format!("bad parameter in layer {text:?}")))?;
    Ok((mu, parse_list(p)?))
}

fn print_report(report: &Report) -> Status {
    print!("{report}");
    for r in report.failures() {
        eprintln!("failed check: {} on {}", r.check, r.target);
    }
    if report.passed() {
        Status::Ok
    } else {
        Status::Failed
    }
}

fn cmd_surface(ctx: &Context, action: SurfaceAction) -> Result<Status> {
    match action {
        SurfaceAction::Build { seed_curve, layer, out } => {
            let seed = load_curve(&seed_curve)?;
            let layers = layer.iter().map(|l| parse_layer(l)).collect::<Result<Vec<_>>>()?;
            let s = build_surface(&seed, &layers, ctx.policy)?;
            emit(out.as_deref(), &surface_to_string(&s)?)?;
            Ok(Status::Ok)
        }
        SurfaceAction::Check { input, tol } => {
            let s = load_surface(&input)?;
            let rep = check_isothermic(&s, tol)?;
            println!("{:<6} {:>14} {:>11} {:>11} {:>11} {:>11}", "edge", "mu", "reality", "constancy", "mu err", "nu");
            for e in &rep.edges {
                println!(
                    "{:<6} {:>14.9} {:>11.3e} {:>11.3e} {:>11.3e} {:>11}",
                    e.edge,
                    e.mu_fit,
                    e.reality,
                    e.constancy,
                    e.mu_mismatch,
                    e.nu_factorization.map_or("-".into(), |v| format!("{v:.3e}"))
                );
                if e.worst() >= tol {
                    eprintln!("failed check: isothermic on edge {}", e.edge);
                }
            }
            Ok(if rep.passed { Status::Ok } else { Status::Failed })
        }
        SurfaceAction::Moutard { input } => {
            let s = load_surface(&input)?;
            let ml = moutard_lift(&s)?;
            println!("normalization {:.3e}", ml.normalization_residual);
            let mut ok = ml.normalization_residual < 1e-6;
            for (e, (a, p)) in ml.area_residual.iter().zip(&ml.product_residual).enumerate() {
                println!("edge {e}: area {a:.3e}, product {p:.3e}");
                ok &= *a < 1e-7 && *p < 1e-8;
            }
            Ok(if ok { Status::Ok } else { Status::Failed })
        }
    }
}

fn cmd_dual(ctx: &Context, a: IoArgs) -> Result<Status> {
    match read_document(&a.input)? {
        Document::Curve(c) => {
            let d = christoffel_dual(&c, &vec![0.0; c.n()], ctx.policy)?;
            emit(a.out.as_deref(), &curve_to_string(&d)?)?;
            Ok(Status::Ok)
        }
        Document::Surface(s) => {
            let d = surface_christoffel(&s, ctx.policy)?;
            let worst = d.consistency.iter().fold(0.0_f64, |a, b| a.max(*b));
            eprintln!("dual: edge/smooth consistency {worst:.3e}");
            emit(a.out.as_deref(), &surface_to_string(&d.dual)?)?;
            Ok(if worst < 1e-7 { Status::Ok } else { Status::Failed })
        }
    }
}

fn cmd_calapso(ctx: &Context, a: CalapsoArgs) -> Result<Status> {
    match read_document(&a.input)? {
        Document::Curve(c) => {
            let (field, curve) = calapso_curve(&c, a.t, ctx.correction, ctx.policy)?;
            eprintln!("calapso: metric drift {:.3e}", field.metric_drift());
            emit(a.out.as_deref(), &curve_to_string(&curve)?)?;
            Ok(Status::Ok)
        }
        Document::Surface(s) => {
            let c = surface_calapso(&s, a.t, ctx.correction, ctx.policy)?;
            let worst = c.trivialization.iter().fold(0.0_f64, |a, b| a.max(*b));
            eprintln!("calapso: trivialization residual {worst:.3e}");
            emit(a.out.as_deref(), &surface_to_string(&c.transformed)?)?;
            Ok(if worst < 1e-6 { Status::Ok } else { Status::Failed })
        }
    }
}

fn cmd_cmc(a: CmcArgs) -> Result<Status> {
    let (s, tpc) = match (a.fixture.as_deref(), a.input.as_deref()) {
        (Some("cmc-cylinder"), _) => cmc_cylinder(fixture_grid(), a.radius, a.delta, a.layers)?,
        (Some(other), _) => return Err(Error::InvalidInput(format!("unknown cmc fixture {other:?}"))),
        (None, Some(path)) => {
            let s = load_surface(path)?;
            let normals = a
                .normals
                .as_deref()
                .ok_or_else(|| Error::InvalidInput("--normals is required with --in".into()))?;
            let raw: Vec<Vec<Vec<f64>>> = serde_json::from_str(&std::fs::read_to_string(normals)?)?;
            let normals = raw
                .into_iter()
                .map(|c| c.into_iter().map(nalgebra::DVector::from_vec).collect())
                .collect::<Vec<Vec<_>>>();
            let tpc = TangentPlaneCongruence::from_euclidean_normals(&s, &normals)?;
            (s, tpc)
        }
        (None, None) => return Err(Error::InvalidInput("give --fixture or --in".into())),
    };
    let mut ok = true;
    let mut line = |name: &str, v: f64, tol: f64| {
        let pass = v < tol;
        ok &= pass;
        println!("{name:<28} {v:>12.3e} {tol:>10.1e}  {}", if pass { "pass" } else { "FAIL" });
        if !pass {
            eprintln!("failed check: {name}");
        }
    };
    if s.m().windows(2).all(|w| w[0].signum() == w[1].signum()) && s.mu().iter().all(|&mu| mu != 0.0) {
        let dual = surface_christoffel(&s, StepPolicy::Grid)?;
        let (_, r) = is_christoffel_pair_mixed_area(&NetField::affine(&s), &NetField::affine(&dual.dual), a.tol)?;
        line("cmc.mixed_area_dual", r, 1e-7);
    }
    let h: Vec<f64> = mean_curvature(&s, &tpc)?.into_iter().flatten().collect();
    if h.is_empty() {
        return Err(Error::InvalidInput("mean curvature needs at least one edge".into()));
    }
    let (centre, spread) = relative_spread(&h);
    println!("H = {centre:.12}");
    line("cmc.h_spread", spread, 1e-8);
    let cert = cmc_linear_cq(&s, &tpc, centre)?;
    let r = &cert.residuals;
    line("cmc.cq.orthogonality", r.orthogonality, a.tol);
    line("cmc.cq.edge", r.edge, a.tol);
    line("cmc.cq.smooth", r.smooth, a.tol);
    line("cmc.cq.transport", r.transport, a.tol);
    line("cmc.cq.norm_coefficients", r.norm_coefficients, a.tol);
    line("cmc.unit_norm", cert.unit_norm, 1e-10);
    line("cmc.h_agreement", cert.h_agreement, 1e-8);
    line("cmc.christoffel", cert.christoffel, 1e-7);
    Ok(if ok { Status::Ok } else { Status::Failed })
}

fn cmd_verify(ctx: &Context, a: VerifyArgs) -> Result<Status> {
    let opts = ctx.verify_options().with_suites(&a.suite)?;
    let report = match (a.surface.as_deref(), a.curve.as_deref()) {
        (Some(p), None) => verify_surface(&load_surface(p)?, &opts)?,
        (None, Some(p)) => verify_curve(&load_curve(p)?, &opts)?,
        _ => return Err(Error::InvalidInput("give exactly one of --surface or --curve".into())),
    };
    if let Some(path) = a.csv.as_deref() {
        report.write_csv(std::fs::File::create(path)?)?;
    }
    Ok(print_report(&report))
}

fn cmd_export(ctx: &Context, a: ExportArgs) -> Result<Status> {
    let s = load_surface(&a.input)?;
    let mut buf = Vec::new();
    match a.format {
        ExportFormat::Obj => write_obj(&s, &mut buf)?,
        ExportFormat::Csv => verify_surface(&s, &ctx.verify_options())?.write_csv(&mut buf)?,
    }
    match a.out.as_deref() {
        Some(p) => std::fs::write(p, &buf)?,
        None => std::io::stdout().lock().write_all(&buf)?,
    }
    Ok(Status::Ok)
}

/// Names accepted by `curve --fixture`.
pub fn fixture_names() -> Vec<&'static str> {
    std::iter::once("unit-circle").chain(SURFACE_FIXTURES).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_parsing() {
        assert_eq!(parse_list("2,-0.5").unwrap(), vec![2.0, -0.5]);
        assert!(parse_list("2,x").is_err());
        assert!(parse_list("nan").is_err());
        let g = parse_grid("0:6.283185:629").unwrap();
        assert_eq!(g.len(), 629);
        assert!(parse_grid("0:1").is_err());
        assert_eq!(parse_layer("-2:2,0").unwrap(), (-2.0, vec![2.0, 0.0]));
        assert!(fixture_names().contains(&"cmc-cylinder"));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["isothermic", "frobnicate"]), 2);
        assert_eq!(run(["isothermic", "verify", "--surface", "/nonexistent/s.json"]), 2);
        assert_eq!(run(["isothermic", "--step-policy", "substep:0", "verify"]), 2);
        assert_eq!(run(["isothermic", "--help"]), 0);
    }
}
