use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hyplevel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyplevel")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = args.to_vec();
    all.extend(["--out-dir", dir.to_str().unwrap()]);
    hyplevel(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect()
}

#[test]
fn trace_of_mobius_level_set_lies_on_a_circle() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["trace", "--f", "phi(0.5,0)", "--lambda", "1.2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let header = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(header.starts_with("s,re_z,im_z,re_t,im_t,ke,kh,u_residual\n"));
    let rows = read_csv(&dir.path().join("trace.csv"));
    assert!(rows.len() > 10);
    // |φ_a(z)|² = 1.2|z|² − 0.2 is the circle |z − c| = ρ through three of
    // the samples; every other sample must sit on it
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r[1], r[2])).collect();
    let (c, rho) = circle_through(pts[0], pts[pts.len() / 2], pts[pts.len() - 1]);
    for (x, y) in &pts {
        let d = ((x - c.0).powi(2) + (y - c.1).powi(2)).sqrt();
        assert!((d - rho).abs() < 1e-9, "off circle by {}", d - rho);
    }
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("trace.json")).unwrap()).unwrap();
    assert_eq!(json["map"], "phi(0.5,0)");
}

fn circle_through(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> ((f64, f64), f64) {
    let d = 2.0 * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
    let n = |p: (f64, f64)| p.0 * p.0 + p.1 * p.1;
    let ux = (n(a) * (b.1 - c.1) + n(b) * (c.1 - a.1) + n(c) * (a.1 - b.1)) / d;
    let uy = (n(a) * (c.0 - b.0) + n(b) * (a.0 - c.0) + n(c) * (b.0 - a.0)) / d;
    ((ux, uy), ((a.0 - ux).powi(2) + (a.1 - uy).powi(2)).sqrt())
}

#[test]
fn radius_of_extremal_map_is_one_over_root_two() {
    let alpha0 = (2f64.sqrt() + 2.0).sqrt() / 2.0;
    let f = format!("falpha({alpha0})");
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["radius", "--f", &f]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("omega = 0.707107"), "{text}");
    assert!(text.contains("witness r = "), "{text}");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("radius.json")).unwrap()).unwrap();
    let omega = json["omega"].as_f64().unwrap();
    assert!((omega - 0.5f64.sqrt()).abs() < 1e-5);
}

#[test]
fn verify_all_on_default_corpus_exits_zero() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["verify-all", "--corpus", "default"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify-all.json")).unwrap()).unwrap();
    let entries = json["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 50);
    assert_eq!(json["violations"], 0);
    assert!(entries.iter().all(|e| !e["bounds"].as_array().unwrap().is_empty()));
}

#[test]
fn parse_error_exits_one_with_offset() {
    let out = hyplevel(&["trace", "--f", "compose(phi(0.5,0),rot(1)"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("at byte 25"), "{err}");
}

#[test]
fn usage_and_domain_errors_exit_one() {
    assert_eq!(hyplevel(&["trace"]).status.code(), Some(1));
    assert_eq!(hyplevel(&["trace", "--f", "phi(0.5,0)", "--lambda", "0.5"]).status.code(), Some(1));
    assert_eq!(hyplevel(&["measures", "--f", "phi(0.5,0)", "--lambda", "1.2", "--out-dir", "/nonexistent/x"]).status.code(), Some(1));
    assert_eq!(hyplevel(&["--help"]).status.code(), Some(0));
}

#[test]
fn measures_report_ungated_area_bound_without_failing() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["measures", "--f", "falpha(0.4)", "--r", "0.6", "--formats", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("measures.json")).unwrap()).unwrap();
    let area = json["section7"].as_array().unwrap().iter().find(|c| c["id"] == "T75_area").unwrap();
    assert!(area["margin"].as_f64().unwrap() < 0.0);
    assert_eq!(area["gated"], false);
    assert!(json["gauss_bonnet_residual"].as_f64().unwrap().abs() < 1e-8);
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn identical_runs_give_identical_bytes() {
    for args in [
        &["bounds", "--f", "compose(kalpha(0.6),phi(0.3,0.1))", "--lambda", "1.1"][..],
        &["verify-all"][..],
    ] {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        assert_eq!(run_in(a.path(), args).status.code(), Some(0));
        let out = Command::new(env!("CARGO_BIN_EXE_hyplevel"))
            .args(args)
            .args(["--out-dir", b.path().to_str().unwrap()])
            .env("HYPLEVEL_THREADS", "1")
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(snapshot(a.path()), snapshot(b.path()));
    }
}

#[test]
fn svg_is_presentation_only() {
    let (with, without) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["curvature", "--f", "smul(0.8,0,blaschke([(0.4,0.2,1)];1,0))", "--lambda", "1.5"];
    let mut a = args.to_vec();
    a.extend(["--formats", "csv,json,svg"]);
    assert_eq!(run_in(with.path(), &a).status.code(), Some(0));
    assert_eq!(run_in(without.path(), &args).status.code(), Some(0));
    let mut full = snapshot(with.path());
    let svg = full.iter().position(|(n, _)| n == "curvature.svg").expect("svg written");
    let plot = String::from_utf8(full.remove(svg).1).unwrap();
    assert!(plot.starts_with("<svg") && plot.contains("<circle") && plot.contains("<rect"));
    assert_eq!(full, snapshot(without.path()));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_hyplevel"))
        .args(["verify-all", "--formats", "json"])
        .env("HYPLEVEL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
