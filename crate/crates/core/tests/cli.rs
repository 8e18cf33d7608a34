use std::path::Path;
use std::process::{Command, Output};

fn protmesh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_protmesh")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SQUARE: &str = "2 4\n0 0\n1 0\n1 1\n0 1\n";

#[test]
fn delaunay_square_is_unprotected() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "sq.txt", SQUARE);
    let out = protmesh(&["delaunay", &pts, "--protection"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("delta=0"), "{}", stdout(&out));
}

#[test]
fn delaunay_then_analyze_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "sq.txt", SQUARE);
    let before = std::fs::read(&pts).unwrap();
    for ext in ["txt", "json"] {
        let mesh = dir.path().join(format!("mesh.{ext}"));
        let m = mesh.to_str().unwrap();
        assert_eq!(protmesh(&["delaunay", &pts, "--out", m]).status.code(), Some(0));
        let report = dir.path().join("report.json");
        let out = protmesh(&["analyze", m, "--json", report.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).contains("C_Xi=0.25"), "{}", stdout(&out));
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
        assert_eq!(v["card"], 2);
    }
    assert_eq!(std::fs::read(&pts).unwrap(), before, "input file changed");
}

#[test]
fn refuses_to_overwrite_input() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "sq.txt", SQUARE);
    let out = protmesh(&["delaunay", &pts, "--out", &pts]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(std::fs::read_to_string(&pts).unwrap(), SQUARE);
}

#[test]
fn missing_and_malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(protmesh(&["analyze", "/nonexistent/mesh.txt"]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.txt", "2 3\n0 0\n1 x\n");
    assert_eq!(protmesh(&["delaunay", &bad]).status.code(), Some(2));
    let dup = write(dir.path(), "dup.txt", "2 4\n0 0\n1 0\n0 1\n0 0\n");
    assert_eq!(protmesh(&["delaunay", &dup]).status.code(), Some(2));
    let cfg = write(dir.path(), "cfg.json", "{ not json");
    assert_eq!(protmesh(&["verify", &cfg]).status.code(), Some(2));
    let unknown = write(dir.path(), "unknown.json", r#"{"no_such_key": 1}"#);
    assert_eq!(protmesh(&["verify", &unknown]).status.code(), Some(2));
    assert_eq!(protmesh(&["no-such-verb"]).status.code(), Some(2));
}

#[test]
fn too_many_points_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("2 6000\n");
    for i in 0..6000 {
        text.push_str(&format!("{} {}\n", i % 100, i / 100));
    }
    let pts = write(dir.path(), "big.txt", &text);
    assert_eq!(protmesh(&["delaunay", &pts]).status.code(), Some(2));
}

#[test]
fn coxeter_trend_decreases() {
    let out = protmesh(&["coxeter", "--trend", "2,3,4"]);
    assert_eq!(out.status.code(), Some(0));
    let ratios: Vec<f64> = stdout(&out)
        .split_whitespace()
        .filter_map(|t| t.strip_prefix("delta_over_h="))
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 3, "{}", stdout(&out));
    assert!(ratios.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn interp_and_fem_succeed() {
    assert_eq!(protmesh(&["interp", "--grid", "2,8", "--degree", "2", "--norm", "inf"]).status.code(), Some(0));
    assert_eq!(protmesh(&["interp", "--grid", "2,8", "--vector", "rotational"]).status.code(), Some(0));
    assert_eq!(protmesh(&["interp", "--grid", "2"]).status.code(), Some(2));
    assert_eq!(protmesh(&["fem", "--grid", "2,8", "--case", "quadratic-bubble"]).status.code(), Some(0));
    assert_eq!(protmesh(&["fem", "--grid", "4,2"]).status.code(), Some(2));
    assert_eq!(protmesh(&["fem", "--grid", "2,8", "--c-int-first", "1e-6"]).status.code(), Some(1));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.json", r#"{"sections": ["protection", "optimality"], "optimality_sets": 5}"#);
    let json = dir.path().join("report.json");
    let csv = dir.path().join("report.csv");
    let out = protmesh(&["verify", &ok, "--json", json.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("section,"));

    let fabricated = write(
        dir.path(),
        "bad.json",
        r#"{"sections": ["theorems"], "dims": [2], "instances": 4, "c_int": 1e-6}"#,
    );
    assert_eq!(protmesh(&["verify", &fabricated]).status.code(), Some(1));
}
