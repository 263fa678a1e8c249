use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isothermic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn circle_then_darboux_report() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.json");
    let layer = dir.path().join("layer.json");
    let o = run(&["curve", "--family", "circle", "--radius", "1", "--grid", "0:6.283185:629", "--out", path_str(&c)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&c).unwrap()).unwrap();
    assert_eq!(doc["grid"]["N"], 629);
    assert_eq!(doc["x"].as_array().unwrap().len(), 629);

    let o = run(&["darboux", "--in", path_str(&c), "--mu", "-2", "--init", "2,0", "--out", path_str(&layer), "--report"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let err = stderr(&o);
    let fitted: f64 = err
        .split("fitted mu = ")
        .nth(1)
        .and_then(|s| s.split(',').next())
        .and_then(|s| s.trim().parse().ok())
        .expect("report names the fitted parameter");
    assert!((fitted + 2.0).abs() < 1e-6, "{fitted}");
    assert!(layer.exists());
}

#[test]
fn riccati_route_matches() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.json");
    assert_eq!(code(&run(&["curve", "--fixture", "unit-circle", "--out", path_str(&c)])), 0);
    let o = run(&["darboux", "--in", path_str(&c), "--mu", "-2", "--init", "1.5,0.8", "--route", "riccati", "--report"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn surface_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.json");
    let s = dir.path().join("s.json");
    let csv = dir.path().join("report.csv");
    let obj = dir.path().join("s.obj");
    assert_eq!(code(&run(&["curve", "--fixture", "unit-circle", "--out", path_str(&c)])), 0);
    let o = run(&["surface", "build", "--seed-curve", path_str(&c), "--layer", "-2:2,0", "--layer", "1:3,1", "--out", path_str(&s)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&run(&["surface", "check", "--in", path_str(&s)])), 0);
    assert_eq!(code(&run(&["surface", "moutard", "--in", path_str(&s)])), 0);

    let o = run(&["verify", "--surface", path_str(&s), "--suite", "all", "--csv", path_str(&csv)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "check,edge_or_curve,max_residual,tolerance,pass");
    let checks: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    let mut sorted = checks.clone();
    sorted.sort();
    assert_eq!(checks, sorted);

    assert_eq!(code(&run(&["export", "--in", path_str(&s), "--format", "obj", "--out", path_str(&obj)])), 0);
    let mesh = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(mesh.lines().filter(|l| l.starts_with("v ")).count(), 3 * 1501);
    assert_eq!(mesh.lines().filter(|l| l.starts_with("f ")).count(), 2 * 1500);

    for sub in ["dual", "calapso"] {
        let mut args = vec![sub, "--in", path_str(&s)];
        if sub == "calapso" {
            args.extend(["--t", "0.5"]);
        }
        let o = run(&args);
        assert_eq!(code(&o), 0, "{sub}: {}", stderr(&o));
    }
}

#[test]
fn tolerance_override_turns_a_pass_into_a_failure() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    assert_eq!(code(&run(&["curve", "--fixture", "concentric-pair", "--out", path_str(&s)])), 0);
    let o = run(&["--tol-override", "christoffel.consistency=1e-30", "verify", "--surface", path_str(&s), "--suite", "christoffel"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("failed check: christoffel.consistency"));
}

#[test]
fn bianchi_and_cmc() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.json");
    assert_eq!(code(&run(&["curve", "--fixture", "unit-circle", "--out", path_str(&c)])), 0);
    let o = run(&["bianchi", "--in", path_str(&c), "--mu", "-2,1", "--init", "2,0", "--init", "0.4,-0.3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&["--seed", "3", "bianchi", "--in", path_str(&c), "--mu", "-2,1,3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&["cmc", "--fixture", "cmc-cylinder"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("H = -0.5"));
}

#[test]
fn usage_and_data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["frobnicate"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).to_lowercase().contains("usage"));
    assert_eq!(code(&run(&["curve", "--family", "circle", "--bogus"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run(&["verify", "--surface", path_str(&missing)])), 2);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n":2,"grid":{"s0":0,"s1":1,"N":3},"x":[[0,0],[1,0]],"m":[1,1,1]}"#).unwrap();
    let o = run(&["verify", "--curve", path_str(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).starts_with("error: "));

    let s4 = dir.path().join("s4.json");
    let o = run(&["curve", "--family", "circle", "--dim", "4", "--out", path_str(&s4)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&["darboux", "--in", path_str(&s4), "--mu", "-2", "--init", "2,0,0,0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}
