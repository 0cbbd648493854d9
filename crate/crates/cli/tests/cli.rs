use std::fs;
use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_sol-geo");

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let o = Command::new(BIN).args(args).env("SOL_GEO_THREADS", "2").output().unwrap();
    Run {
        code: o.status.code().unwrap_or(-1),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn ok(args: &[&str]) -> Value {
    let r = run(args);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

#[test]
fn summary_embeds_config_and_version() {
    let v = ok(&["residual", "--surface", "plane-x", "--grid", "6"]);
    assert_eq!(v["tool"], "sol-geo");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["command"]["residual"]["grid"], 6);
    assert_eq!(v["config"]["command"]["residual"]["surface"]["surface"], "plane-x");
}

#[test]
fn residual_examples() {
    let v = ok(&["residual", "--surface", "saddle-point", "--window", "-2", "2", "-2", "2", "-2", "2", "--grid", "50"]);
    assert!(v["result"]["max_abs_residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["result"]["minimal"], true);
    let loci = v["result"]["singular_loci"].as_array().unwrap();
    assert_eq!(loci.len(), 1);
    assert_eq!(loci[0]["kind"], "point");

    let v = ok(&["residual", "--u", "x+y+z", "--grid", "20"]);
    assert!(v["result"]["max_abs_residual"].as_f64().unwrap() > 1e-2);
    assert_eq!(v["result"]["minimal"], false);

    let r = run(&["residual", "--u", "x + + y"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("byte 4"), "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn residual_finds_the_singular_axis() {
    let v = ok(&["residual", "--surface", "saddle-curve", "--grid", "20"]);
    let loci = v["result"]["singular_loci"].as_array().unwrap();
    assert_eq!(loci.len(), 1);
    assert_eq!(loci[0]["kind"], "curve");
    for k in 0..2 {
        assert!(loci[0]["min"][k].as_f64().unwrap().abs() < 1e-9);
        assert!(loci[0]["max"][k].as_f64().unwrap().abs() < 1e-9);
    }
}

#[test]
fn residual_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    ok(&["residual", "--surface", "plane-ab", "--params", "1", "2", "0.5", "--grid", "8", "--csv", csv.to_str().unwrap()]);
    let (header, rows) = sol_geo::export::read_csv(&fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(header, ["x", "y", "z", "nh", "H", "residual", "NT"]);
    assert!(!rows.is_empty());
    for r in rows {
        // x + 2y + 0.5 = 0 on every row
        assert!((r[0] + 2.0 * r[1] + 0.5).abs() < 1e-12);
    }
}

#[test]
fn curve_examples() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let v = ok(&["curve", "--p0", "0", "0", "0", "--alpha", "0", "--t", "0", "3", "--n", "100", "--csv", csv.to_str().unwrap()]);
    assert_eq!(v["result"]["family"], "exponential");
    assert_eq!(v["result"]["end"], serde_json::json!([0.0, 0.0, 3.0]));
    let (_, rows) = sol_geo::export::read_csv(&fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 101);
    for r in &rows {
        assert_eq!([r[1], r[2]], [0.0, 0.0]);
        assert!((r[3] - r[0]).abs() < 1e-15);
    }

    let v = ok(&["curve", "--p0", "0.5", "-1", "0.2", "--alpha", "2.1", "--t", "-5", "5", "--oracle"]);
    assert!(v["result"]["oracle"]["sup_deviation"].as_f64().unwrap() < 1e-8);

    let r = run(&["curve", "--p0", "0", "0", "0", "--v", "1", "1", "0"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("not horizontal"));
}

#[test]
fn sweep_examples() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("s.obj");
    let csv = dir.path().join("s.csv");
    // −∂x + ∂y + ∂z = √2·Y + X at the origin
    let v = ok(&[
        "sweep", "--gamma", "exp", "--x0", "0", "0", "0", "--v0", "-1", "1", "1", "--grid", "7", "9", "--scan-singular", "--obj",
        obj.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ]);
    let r = &v["result"];
    assert!(r["orthogonality_defect"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["rulings_geodesic"], false);
    let loci = r["singular_loci"].as_array().unwrap();
    assert_eq!(loci.len(), 1);
    assert_eq!(loci[0]["t_min"], 0.0);
    assert_eq!(loci[0]["t_max"], 0.0);

    let text = fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 63);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 48);
    let (header, rows) = sol_geo::export::read_csv(&fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(header.len(), 7);
    assert_eq!(rows.len(), 63);

    let v = ok(&["sweep", "--gamma", "x-line", "--x0", "0", "0", "0", "--scan-singular"]);
    assert_eq!(v["result"]["branches"]["x_branch"], 21);
    assert_eq!(v["result"]["singular_loci"].as_array().unwrap().len(), 1);
}

#[test]
fn stability_examples() {
    let v = ok(&["stability", "qform", "--surface", "plane-x", "--battery", "6", "--seed", "7"]);
    let r = &v["result"];
    assert_eq!(r["battery"], 6);
    assert_eq!(r["all_nonnegative"], true);
    for e in r["reports"].as_array().unwrap() {
        let q = &e["report"];
        assert!(q["total"].as_f64().unwrap() >= -q["error_estimate"].as_f64().unwrap());
        assert!(q.get("boundary_integral_S").is_some());
    }

    let v = ok(&["stability", "sufficient", "--surface", "plane-x"]);
    assert_eq!(v["result"]["sufficient_condition_met"], true);
    let v = ok(&["stability", "sufficient", "--surface", "plane-x", "--flip-orientation"]);
    assert_eq!(v["result"]["sufficient_condition_met"], false);

    let v = ok(&["stability", "area", "--surface", "plane-z", "--eta", "0.3"]);
    let c = &v["result"]["competitors"][0];
    assert!(c["area"].as_f64().unwrap() > v["result"]["base_area"].as_f64().unwrap());

    let v = ok(&["stability", "jacobi", "--surface", "saddle-point", "--point", "0.2", "-0.1", "0.3", "--foliation"]);
    assert!(v["result"]["profile"]["max_ode_residual"].as_f64().unwrap() < 1e-9);
    assert!(v["result"]["max_foliation_deviation"].as_f64().unwrap() < 1e-5);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
    assert_eq!(run(&["--version"]).code, 0);
    assert_eq!(run(&["residual", "--surface", "no-such"]).code, 2);
    assert_eq!(run(&["residual", "--surface", "plane-x", "--grid", "1"]).code, 2);
    assert_eq!(run(&["residual", "--surface", "plane-x", "--window", "1", "-1", "0", "1", "0", "1"]).code, 2);
    assert_eq!(run(&["residual", "--surface", "plane-x", "--u", "x"]).code, 2);
    assert_eq!(run(&["residual", "--surface", "plane-x", "--params", "1", "2"]).code, 2);
    // the window misses the plane x = 5
    assert_eq!(run(&["residual", "--surface", "plane-x", "--params", "-5", "--grid", "4"]).code, 3);
    assert_eq!(run(&["stability", "area", "--surface", "saddle-point"]).code, 2);
    assert_eq!(run(&["stability", "qform", "--surface", "plane-z", "--compare", "--battery", "1"]).code, 2);
    assert_eq!(run(&["stability", "qform", "--surface", "plane-x", "--flip-orientation", "--battery", "1"]).code, 0);
    let r = run(&["residual", "--surface", "plane-x", "--config", "/nonexistent/cfg"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("config"));
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# residual run\nsurface = plane-ab\nparams = 1 1 0\ngrid = 7\nminimal_tol = 1e-6\n").unwrap();
    let c = cfg.to_str().unwrap();
    let v = ok(&["residual", "--config", c]);
    let cfgv = &v["config"]["command"]["residual"];
    assert_eq!(cfgv["grid"], 7);
    assert_eq!(cfgv["minimal_tol"], 1e-6);
    assert_eq!(cfgv["surface"]["params"], serde_json::json!([1.0, 1.0, 0.0]));
    // flags beat the file, the file beats defaults
    let v = ok(&["--config", c, "residual", "--grid", "5"]);
    assert_eq!(v["config"]["command"]["residual"]["grid"], 5);
    assert_eq!(v["config"]["command"]["residual"]["minimal_tol"], 1e-6);
    let v = ok(&["residual", "--surface", "plane-y"]);
    assert_eq!(v["config"]["command"]["residual"]["grid"], 50);
}

#[test]
fn summary_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.json");
    let r = run(&["--summary", out.to_str().unwrap(), "stability", "sufficient", "--surface", "plane-y", "--grid", "4"]);
    assert_eq!(r.code, 0);
    assert_eq!(fs::read_to_string(&out).unwrap(), r.stdout);
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        &["stability", "qform", "--surface", "saddle-point", "--battery", "4", "--seed", "11"][..],
        &["residual", "--surface", "saddle-curve", "--params", "0.3", "-0.2", "0.1", "--grid", "12"][..],
        &["sweep", "--gamma", "ramp", "--x0", "0.1", "0.2", "0.3", "--grid", "9", "9"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.code, 0, "{}", a.stderr);
        assert_eq!(a.stdout, b.stdout);
    }
}
