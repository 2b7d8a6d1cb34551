use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const E1: &str = "# two boxes\nf1 = z^2*(w - z)^2\nf2 = w^2 + z^3\n";
const E2: &str = "f1 = z^3*(w - z)^4\nf2 = w^2 + z^3\n";
const E3: &str = "f1 = z^3 + z*w^2\nf2 = w^2\n";

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], map: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plane-escape")).args(args).arg(map).output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn analyze_example_one() {
    let dir = TempDir::new().unwrap();
    let o = run(&["analyze"], &write(&dir, "e1.map", E1));
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["command"], "analyze");
    assert_eq!(r["payload"]["d_t"], 10);
    assert_eq!(r["payload"]["regime"], "pluripolar");
    assert_eq!(r["payload"]["points"][0]["ell_i"], "2/1");
    assert!(r["input_digest"].as_str().unwrap().starts_with("sha256:"));
    assert_eq!(r["configuration"]["precision"], 53);
}

#[test]
fn validation_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let o = run(&["analyze"], &write(&dir, "sq.map", "f1 = z^2\nf2 = w^2\n"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("deg f1 must exceed deg f2"));
    let o = run(&["analyze"], &write(&dir, "half.map", "f2 = w^2\n"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("f1"));
    let o = run(&["analyze"], &write(&dir, "typo.map", "f1 = z^3 +\nf2 = w^2\n"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("f1"));
    let o = run(&["analyze"], &dir.path().join("absent.map"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_writes_csv_without_violations() {
    let dir = TempDir::new().unwrap();
    let map = write(&dir, "e1.map", E1);
    let csv = dir.path().join("s.csv");
    let o = run(
        &["simulate", "--samples", "1000", "--iters", "25", "--seed", "7", "--csv", csv.to_str().unwrap()],
        &map,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    assert_eq!(r["payload"]["violations"].as_array().unwrap().len(), 0);
    assert_eq!(r["seed"], 7);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1001);
    assert!(text.starts_with("point_id,z0_re,z0_im,w0_re,w0_im,classification,rate_lower,rate_upper,itinerary\n"));
}

#[test]
fn simulate_edge_cases() {
    let dir = TempDir::new().unwrap();
    let map = write(&dir, "e1.map", E1);
    let csv = dir.path().join("z.csv");
    let o = run(&["simulate", "--samples", "0", "--csv", csv.to_str().unwrap()], &map);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1);
    assert_eq!(run(&["simulate"], &map).status.code(), Some(64));
    assert_eq!(run(&["simulate", "--samples", "5", "--annulus", "3"], &map).status.code(), Some(64));
    assert_eq!(run(&["simulate", "--samples", "ten"], &map).status.code(), Some(64));
}

#[test]
fn transform_winds_eight_times() {
    let dir = TempDir::new().unwrap();
    let map = write(&dir, "e1.map", E1);
    let o = run(&["transform", "--word", "111", "--level", "1e-2"], &map);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    assert_eq!(r["payload"]["measure"]["winding_count"], 8);
    assert_eq!(r["payload"]["measure"]["total_mass"], "1/1");
    assert_eq!(r["payload"]["potential"]["values"].as_array().unwrap().len(), 81);
    assert_eq!(r["configuration"]["word"], "111");
}

#[test]
fn transform_rejects_bad_words() {
    let dir = TempDir::new().unwrap();
    let map = write(&dir, "e1.map", E1);
    for w in ["1!2", "13", ""] {
        let o = run(&["transform", "--word", w], &map);
        assert_eq!(o.status.code(), Some(64), "{w}: {}", stderr(&o));
    }
    assert_eq!(run(&["transform", "--word", "11", "--kmax", "3"], &map).status.code(), Some(64));
    assert_eq!(run(&["transform", "--word", "11", "--level", "0.5"], &map).status.code(), Some(2));
}

#[test]
fn transform_table_decreases() {
    let dir = TempDir::new().unwrap();
    let map = write(&dir, "e2.map", E2);
    let o = run(&["transform", "--kmax", "5", "--seed", "1", "--level", "1e-2"], &map);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    let rows = r["payload"]["diagnostics"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let d: Vec<f64> = rows[..4].iter().map(|x| x["log10_d"].as_f64().unwrap()).collect();
    assert!(d.windows(2).all(|p| p[1] < p[0]), "{d:?}");
    assert_eq!(r["configuration"]["word"].as_str().unwrap().len(), 5);
}

#[test]
fn report_bundles_sections() {
    let dir = TempDir::new().unwrap();
    let o = run(&["report"], &write(&dir, "e1.map", E1));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let p = json(&o)["payload"].clone();
    for k in ["analyze", "simulate", "transform"] {
        assert!(!p[k].is_null(), "{k}");
    }
    assert!(p["analyze"]["points"][0].get("certificate").is_none());
    assert!(p["simulate"].get("rows").is_none());

    let o = run(&["report", "--full"], &write(&dir, "e3.map", E3));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let p = json(&o)["payload"].clone();
    let pts = p["analyze"]["points"].as_array().unwrap();
    assert_eq!(pts.len(), 3);
    assert!(pts.iter().all(|q| q["certificate"]["polygon"].is_array() && q["certificate"]["checks"]["segment_avoided"] == true));
    assert!(p["simulate"]["rows"].is_array());

    let o = run(&["report"], &write(&dir, "sq.map", "f1 = z^2\nf2 = w^2\n"));
    assert_eq!(o.status.code(), Some(2));
    let p = json(&o)["payload"].clone();
    assert!(p["analyze"].is_null() && p["simulate"].is_null() && p["transform"].is_null());
    assert_eq!(p["errors"].as_array().unwrap().len(), 1);
}

#[test]
fn payloads_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let map = write(&dir, "e1.map", E1);
    let payload = |args: &[&str]| {
        let r = json(&run(args, &map));
        (r["payload"].to_string(), r["configuration"].to_string(), r["input_digest"].to_string())
    };
    let sim = ["simulate", "--samples", "200", "--seed", "3", "--rows", "--threads", "2"];
    assert_eq!(payload(&sim), payload(&sim));
    let tr = ["transform", "--word", "21", "--level", "5e-3"];
    assert_eq!(payload(&tr), payload(&tr));
    let other = ["simulate", "--samples", "200", "--seed", "4", "--rows"];
    assert_ne!(payload(&sim).0, payload(&other).0);
}

#[test]
fn out_flag_and_file_options() {
    let dir = TempDir::new().unwrap();
    let map = write(&dir, "e1.map", &format!("{E1}option.seed = 11\noption.precision_bits = 96\n"));
    let out = dir.path().join("r.json");
    let o = run(&["analyze", "--out", out.to_str().unwrap()], &map);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["seed"], 11);
    assert_eq!(r["configuration"]["precision"], 96);
    let o = run(&["analyze", "--seed", "2"], &map);
    assert_eq!(json(&o)["seed"], 2);
    let o = run(&["analyze"], &write(&dir, "opt.map", &format!("{E1}option.colour = red\n")));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_and_unknown_commands() {
    let bin = env!("CARGO_BIN_EXE_plane-escape");
    assert_eq!(Command::new(bin).arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(Command::new(bin).arg("frobnicate").output().unwrap().status.code(), Some(64));
    assert_eq!(Command::new(bin).output().unwrap().status.code(), Some(64));
}
