//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! lines show up in plain `cargo test` output.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;

use isothermic::bianchi::{bianchi_cube, bianchi_quad, check_bigauge_sections, quad_cross_ratios};
use isothermic::cmc::{
    cmc_linear_cq, is_christoffel_pair_mixed_area, koenigs_data, mean_curvature, verify_koenigs, NetField,
};
use isothermic::curves::{circle_second_derivative, make_curve, tractrix_pair, Family, Grid, PolarizedCurve};
use isothermic::darboux::{
    integrate_parallel_section, integrate_riccati, is_darboux_pair, lift_curve, parallel_residual,
    parallel_section_along, tangent_cross_ratio, LightConeSection,
};
use isothermic::fixtures::{cmc_cylinder, fixture_grid, named_surface, three_layer, unit_circle, SURFACE_FIXTURES};
use isothermic::minkowski::{euclidean_lift, Frame, OrthoMap};
use isothermic::numerics::{relative_spread, StepPolicy};
use isothermic::surface::{moutard_lift, surface_christoffel};
use isothermic::transforms::{
    calapso_darboux_permute, christoffel_darboux_permute, christoffel_dual, dual_derivative_residual,
    integrate_calapso, parallel_constancy, permutation_identity_residual, verify_calapso_composition,
    verify_calapso_gauge, MetricCorrection,
};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn grid() -> Grid {
    fixture_grid()
}

fn max_distance(a: &PolarizedCurve, b: &PolarizedCurve) -> f64 {
    a.x().iter().zip(b.x()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let start = [1.5, 0.8];
    let diff = |g: Grid| {
        let c = unit_circle(g);
        let ric = integrate_riccati(&c, -2.0, &start, StepPolicy::Grid).unwrap();
        let lin = integrate_parallel_section(&c, -2.0, &start, StepPolicy::Grid)
            .unwrap()
            .to_curve(&Frame::canonical(2), c.m())
            .unwrap();
        max_distance(&ric, &lin)
    };
    let fine = diff(grid());
    let ratio = diff(Grid::new(0.0, 1.5, 31).unwrap()) / diff(Grid::new(0.0, 1.5, 61).unwrap());
    check(
        fine < 1e-6 && (12.0..=20.0).contains(&ratio),
        format!("max |riccati - linear| = {fine:.3e} at h = 1e-3, halving ratio {ratio:.2}"),
    )
}

fn criterion_2() -> Outcome {
    let g = grid();
    let x = unit_circle(g);
    let xh = make_curve(&Family::Circle { radius: 2.0, dim: 2 }, g).unwrap();
    let cr: Vec<f64> = tangent_cross_ratio(&x, &xh).unwrap().iter().map(|c| c.scalar_part()).collect();
    let (c1, s1) = relative_spread(&cr);

    let g2 = Grid::new(0.0, std::f64::consts::TAU, 629).unwrap();
    let y = unit_circle(g2);
    let (xp, xm) = tractrix_pair(&y, 0.25, Some(&circle_second_derivative(1.0, 2, &g2))).unwrap();
    let cr: Vec<f64> = tangent_cross_ratio(&xp, &xm).unwrap().iter().map(|c| c.scalar_part()).collect();
    let (c2, s2) = relative_spread(&cr);
    let (m2, ms) = relative_spread(xp.m());
    let rep = is_darboux_pair(&xp, &xm, xp.m(), 1e-8).unwrap();
    check(
        (c1 + 2.0).abs() < 1e-12 && s1 < 1e-12 && (c2 - 0.5).abs() < 1e-8 && s2 < 1e-8 && (m2 - 0.5).abs() < 1e-8 && ms < 1e-8 && rep.passed,
        format!("concentric cr = {c1:.15} (spread {s1:.1e}); tractrix cr = {c2:.12} (spread {s2:.1e}), m = {m2:.12}"),
    )
}

fn quad_setup(c: &PolarizedCurve) -> [LightConeSection; 3] {
    let f = Frame::canonical(2);
    let xi = lift_curve(c, &f).unwrap();
    let xi0 = integrate_parallel_section(c, -2.0, &[2.0, 0.0], StepPolicy::Grid).unwrap();
    let xi1 = integrate_parallel_section(c, 1.0, &[0.4, -0.3], StepPolicy::Grid).unwrap();
    [xi, xi0, xi1]
}

fn criterion_3() -> Outcome {
    let c = unit_circle(grid());
    let [xi, xi0, xi1] = quad_setup(&c);
    let xi01 = bianchi_quad(&xi, &xi0, &xi1, -2.0, 1.0).unwrap();
    let r0 = parallel_residual(&xi0, c.m(), 1.0, &xi01).unwrap();
    let r1 = parallel_residual(&xi1, c.m(), -2.0, &xi01).unwrap();
    let cr = quad_cross_ratios(&xi, &xi0, &xi01, &xi1).unwrap();
    let (centre, spread) = relative_spread(&cr);
    check(
        r0 < 1e-6 && r1 < 1e-6 && (centre + 0.5).abs() < 1e-8 && spread < 1e-8,
        format!("parallel residuals {r0:.2e}, {r1:.2e}; cross ratio {centre:.12} (spread {spread:.1e})"),
    )
}

fn away(v: f64, poles: &[f64]) -> bool {
    poles.iter().all(|p| (v - p).abs() > 0.1)
}

fn criterion_4() -> Outcome {
    let g = Grid::new(0.0, 1.5, 301).unwrap();
    let c = unit_circle(g);
    let f = Frame::canonical(2);
    let xi = lift_curve(&c, &f).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut draws = 0;
    while draws < 20 {
        let mu0: f64 = rng.random_range(-4.0..4.0);
        let mu1: f64 = rng.random_range(-4.0..4.0);
        let t: f64 = rng.random_range(-4.0..4.0);
        if !away(mu0, &[0.0]) || !away(mu1, &[0.0, mu0]) || !away(t, &[mu0, mu1]) {
            continue;
        }
        let s0 = parallel_section_along(&xi, c.m(), mu0, &euclidean_lift(&[2.0, 0.5], &f).unwrap(), &f, StepPolicy::Grid).unwrap();
        let s1 = parallel_section_along(&xi, c.m(), mu1, &euclidean_lift(&[-0.4, 1.7], &f).unwrap(), &f, StepPolicy::Grid).unwrap();
        let s01 = bianchi_quad(&xi, &s0, &s1, mu0, mu1).unwrap();
        let r = check_bigauge_sections(&xi, &s0, &s1, &s01, mu0, mu1, t).unwrap();
        worst = worst.max(r.compositions).max(r.middle);
        draws += 1;
    }
    check(worst < 1e-10, format!("worst bigauge residual over {draws} draws {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let c = unit_circle(grid());
    let f = Frame::canonical(2);
    let xi = lift_curve(&c, &f).unwrap();
    let mus = [-2.0, 1.0, 3.0];
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let secs: Vec<LightConeSection> = mus
            .iter()
            .map(|mu| {
                let p = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
                parallel_section_along(&xi, c.m(), *mu, &euclidean_lift(&p, &f).unwrap(), &f, StepPolicy::Grid).unwrap()
            })
            .collect();
        let cube = bianchi_cube(&xi, [(&secs[0], mus[0]), (&secs[1], mus[1]), (&secs[2], mus[2])]).unwrap();
        worst = worst.max(cube.route_discrepancy);
    }
    check(worst < 1e-6, format!("worst route discrepancy over 10 seeds {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let c = unit_circle(grid());
    let f = Frame::canonical(2);
    let lift = lift_curve(&c, &f).unwrap();
    let mc = MetricCorrection::Every(50);
    let id = OrthoMap::identity(4);
    let drift = integrate_calapso(&lift, c.m(), 1.0, &id, mc, StepPolicy::Grid).unwrap().metric_drift();
    let sec = integrate_parallel_section(&c, -2.0, &[1.5, 0.8], StepPolicy::Grid).unwrap();
    let field = integrate_calapso(&lift, c.m(), -2.0, &id, mc, StepPolicy::Grid).unwrap();
    let frozen = parallel_constancy(&field, &sec);
    let comp = verify_calapso_composition(&lift, c.m(), 0.5, 0.7, mc, StepPolicy::Grid).unwrap();
    let xh = sec.to_curve(&f, c.m()).unwrap();
    let lift_hat = lift_curve(&xh, &f).unwrap();
    let gauge = verify_calapso_gauge(&lift, &lift_hat, c.m(), -2.0, 0.6, mc, StepPolicy::Grid).unwrap();
    let (a, b) = calapso_darboux_permute(&lift, &lift_hat, c.m(), -2.0, 1.0, mc, StepPolicy::Grid).unwrap();
    let rep = is_darboux_pair(&a.to_curve(&f, c.m()).unwrap(), &b.to_curve(&f, c.m()).unwrap(), c.m(), 1e-5).unwrap();
    let fit = (rep.mu + 3.0).abs();
    check(
        drift < 1e-8 && frozen < 1e-6 && comp < 1e-5 && gauge < 1e-5 && fit < 1e-5,
        format!("drift {drift:.1e}, frozen section {frozen:.1e}, composition {comp:.1e}, gauge {gauge:.1e}, |fit - (mu - tau)| {fit:.1e}"),
    )
}

fn criterion_7() -> Outcome {
    let g = grid();
    let helix = make_curve(&Family::Helix { radius: 1.0, pitch: 0.3 }, g).unwrap();
    let helix = helix.with_m(g.nodes().map(|s| 1.0 + 0.3 * s).collect()).unwrap();
    let d = christoffel_dual(&helix, &[0.0; 3], StepPolicy::Grid).unwrap();
    let dd = christoffel_dual(&d, &[0.0; 3], StepPolicy::Grid).unwrap();
    let involution = dd
        .xprime()
        .iter()
        .zip(helix.xprime())
        .map(|(a, b)| (a - b).norm() / b.norm())
        .fold(0.0, f64::max);

    let s = three_layer(g).unwrap();
    let (x, xh) = (&s.curves()[1], &s.curves()[2]);
    let mu = s.mu()[1];
    let xs = christoffel_dual(x, &[0.0, 0.0], StepPolicy::Grid).unwrap();
    let xhs = christoffel_darboux_permute(x, &xs, xh, mu).unwrap();
    let rep = is_darboux_pair(&xs, &xhs, x.m(), 1e-7).unwrap();
    let double = rep
        .residual
        .max(rep.reality)
        .max(((rep.mu - mu) / mu).abs())
        .max(dual_derivative_residual(xh, &xhs))
        .max(permutation_identity_residual(x, &xs, &xhs, mu));

    let sd = surface_christoffel(&s, StepPolicy::Grid).unwrap();
    let consistency = sd.consistency.iter().fold(0.0_f64, |a, b| a.max(*b));
    let (_, area) = is_christoffel_pair_mixed_area(&NetField::affine(&s), &NetField::affine(&sd.dual), 1e-7).unwrap();
    let (_, control) = is_christoffel_pair_mixed_area(&NetField::affine(&s), &NetField::affine(&s), 1e-7).unwrap();
    check(
        involution < 1e-9 && double < 1e-7 && consistency < 1e-7 && area < 1e-7 && control > 1e-3,
        format!("dual of dual {involution:.1e}, double certificate {double:.1e}, edge/smooth {consistency:.1e}, mixed area {area:.1e} (control {control:.2})"),
    )
}

fn criterion_8() -> Outcome {
    let mut area: f64 = 0.0;
    let mut product: f64 = 0.0;
    for name in ["concentric-pair", "tractrix-pair", "cylinder-patch", "three-layer"] {
        let ml = moutard_lift(&named_surface(name).unwrap()).unwrap();
        area = ml.area_residual.iter().fold(area, |a, b| a.max(*b));
        product = ml.product_residual.iter().fold(product, |a, b| a.max(*b));
    }
    check(area < 1e-7 && product < 1e-8, format!("A(xi, xi) {area:.2e}, (xi_i, xi_j) + 1/(2 mu) {product:.2e}"))
}

fn criterion_9() -> Outcome {
    let (s, tpc) = cmc_cylinder(grid(), 1.0, 0.5, 3).unwrap();
    let h: Vec<f64> = mean_curvature(&s, &tpc).unwrap().into_iter().flatten().collect();
    let (centre, spread) = relative_spread(&h);
    let cert = cmc_linear_cq(&s, &tpc, centre).unwrap();
    let r = &cert.residuals;
    let cq = r.orthogonality.max(r.edge).max(r.smooth).max(r.transport);
    let mut koenigs: f64 = 0.0;
    for name in ["cylinder-patch", "three-layer"] {
        let s = named_surface(name).unwrap();
        let (x, z, nu) = koenigs_data(&s, StepPolicy::Grid).unwrap();
        koenigs = koenigs.max(verify_koenigs(&x, &z, &nu, s.grid().step()).unwrap().worst());
    }
    check(
        spread < 1e-8 && cq < 1e-6 && cert.unit_norm < 1e-10 && cert.h_agreement < 1e-8 && koenigs < 1e-6,
        format!("H = {centre:.12} (spread {spread:.1e}), conserved quantity {cq:.1e}, ||z|^2 - 1| {:.1e}, Koenigs {koenigs:.1e}", cert.unit_norm),
    )
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_isothermic")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn corrupt(path: &Path, seed: u64) -> String {
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let curves = doc["curves"].as_array_mut().unwrap();
    let target = rng.random_range(0..curves.len());
    for p in curves[target]["x"].as_array_mut().unwrap() {
        for v in p.as_array_mut().unwrap() {
            let x = v.as_f64().unwrap() + rng.random_range(-1e-3..1e-3);
            *v = serde_json::json!(x);
        }
    }
    serde_json::to_string(&doc).unwrap()
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    for (i, name) in SURFACE_FIXTURES.iter().enumerate() {
        let path = dir.path().join(format!("{name}.json"));
        let p = path.to_str().unwrap();
        let (code, err) = run_cli(&["curve", "--fixture", name, "--out", p]);
        if code != 0 {
            return Err(format!("writing {name} failed: {err}"));
        }
        let (clean, _) = run_cli(&["verify", "--surface", p, "--suite", "all"]);
        let bad = dir.path().join(format!("{name}-noisy.json"));
        std::fs::write(&bad, corrupt(&path, i as u64)).unwrap();
        let (noisy, err) = run_cli(&["verify", "--surface", bad.to_str().unwrap(), "--suite", "all"]);
        let named = err.lines().find_map(|l| l.strip_prefix("failed check: ")).map(str::to_string);
        ok &= clean == 0 && noisy == 1 && named.is_some();
        notes.push(format!("{name} {clean}/{noisy} ({})", named.unwrap_or_else(|| "no check named".into())));
    }
    check(ok, format!("exit codes clean/noisy: {}", notes.join(", ")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Riccati and linear system agree", criterion_1),
        ("closed-form Darboux pairs", criterion_2),
        ("Bianchi quadrilateral", criterion_3),
        ("bigauge identity", criterion_4),
        ("Bianchi cube", criterion_5),
        ("Calapso certificates", criterion_6),
        ("Christoffel duality", criterion_7),
        ("Moutard lift", criterion_8),
        ("constant mean curvature", criterion_9),
        ("command line exit codes", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
