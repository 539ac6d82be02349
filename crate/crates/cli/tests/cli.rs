use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use phasewall_cli::{parse_config, read_report, SCHEMA_VERSION};
use serde_json::Value;
use tempfile::TempDir;

fn phasewall(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasewall")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_arg(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn constant_writes_json_and_profile() {
    let dir = TempDir::new().unwrap();
    let out = path_arg(dir.path());
    let o = phasewall(&["constant", "--which", "m", "--wells", "-1,1", "--R", "5", "--n", "512", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_report(&dir.path().join("m.json")).unwrap();
    assert_eq!(report["schema_version"], SCHEMA_VERSION);
    let value = report["results"]["value"].as_f64().unwrap();
    assert!((value - 2.1).abs() < 0.02, "{value}");
    let csv = fs::read_to_string(dir.path().join("m_profile.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,f"));
    assert_eq!(csv.lines().count(), 514);
}

#[test]
fn inequality_check_passes() {
    let dir = TempDir::new().unwrap();
    let o = phasewall(&["check", "--suite", "inequalities", "--seed", "7", "--out", &path_arg(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_report(&dir.path().join("check.json")).unwrap();
    let suites = report["results"]["suites"].as_array().unwrap();
    let names: Vec<&str> = suites.iter().map(|s| s["suite"].as_str().unwrap()).collect();
    assert_eq!(names, ["hardy", "seminorm_comparison", "lifting"]);
    assert!(suites.iter().all(|s| s["pass"] == Value::Bool(true)));
}

#[test]
fn boundary_sweep_writes_one_row_per_eps() {
    let dir = TempDir::new().unwrap();
    let o = phasewall(&[
        "sweep",
        "--kind",
        "g1d",
        "--L",
        "1",
        "--eps",
        "0.08,0.04,0.02,0.01",
        "--out",
        &path_arg(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "eps,lambda,L,min_energy,bending,potential,fractional,boundary_potential,converged,wall_ms");
    assert_eq!(lines.len(), 5);
    assert!(stderr(&o).contains("under-resolved"));
    let report = read_report(&dir.path().join("sweep.json")).unwrap();
    assert!(report["results"]["plateau"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn lift_reports_both_ratios() {
    let dir = TempDir::new().unwrap();
    let o = phasewall(&["lift", "--n", "64", "--out", &path_arg(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_report(&dir.path().join("lift.json")).unwrap()["results"].clone();
    let (explicit, zeta) = (r["explicit"]["ratio"].as_f64().unwrap(), r["zeta"]["ratio"].as_f64().unwrap());
    assert!(zeta <= explicit);
    assert_eq!(r["in_bracket"], Value::Bool(true));
    for name in ["lift_explicit.csv", "lift_zeta.csv"] {
        let csv = fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(csv.lines().next(), Some("x,y,u"));
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.cfg");
    fs::write(&empty, "").unwrap();
    let o = phasewall(&["--config", &path_arg(&empty)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("requires which") && stderr(&o).contains("requires kind, eps"), "{}", stderr(&o));

    let dup = dir.path().join("dup.cfg");
    fs::write(&dup, "[sweep]\nkind = g1d\nkind = f1d\neps = 0.1,0.05\n").unwrap();
    let o = phasewall(&["--config", &path_arg(&dup)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = phasewall(&["constant", "--which", "m", "--n", "abc"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--n"), "{}", stderr(&o));

    let o = phasewall(&["check", "--suite", "all", "--set", "bogus=1"]);
    assert_eq!(code(&o), 2);

    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = phasewall(&["check", "--suite", "closed_form", "--out", &path_arg(&blocker.join("sub"))]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn numerical_failures_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let o = phasewall(&["sweep", "--kind", "full2d", "--eps", "0.05,0.01", "--out", &path_arg(dir.path())]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("eps"), "{}", stderr(&o));
}

#[test]
fn dry_run_echo_round_trips() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# boundary sweep\nseed = 3\n[sweep]\nkind = g1d\neps = 0.1, 0.05\nL = 2\n").unwrap();
    let o = phasewall(&["--config", &path_arg(&cfg), "--n", "512", "--dry-run"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let echo = String::from_utf8(o.stdout).unwrap();
    let parsed = parse_config(&echo).unwrap();
    assert_eq!(parsed.to_text(), echo);
    assert_eq!(parsed.get("n"), "512");
    assert_eq!(parsed.get("L"), "2.0");
    assert_eq!(parsed.seed, 3);

    let again = dir.path().join("echo.cfg");
    fs::write(&again, &echo).unwrap();
    let o = phasewall(&["--config", &path_arg(&again), "--dry-run"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), echo);
}

#[test]
fn readers_reject_other_schema_versions() {
    let dir = TempDir::new().unwrap();
    let o = phasewall(&["check", "--suite", "closed_form", "--out", &path_arg(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let path = dir.path().join("check.json");
    let text = fs::read_to_string(&path).unwrap();
    assert!(read_report(&path).is_ok());

    fs::write(&path, text.replace("\"schema_version\": \"1\"", "\"schema_version\": \"2\"")).unwrap();
    let err = read_report(&path).unwrap_err().to_string();
    assert!(err.contains("unsupported schema_version '2'"), "{err}");

    let mut v: Value = serde_json::from_str(&text).unwrap();
    v.as_object_mut().unwrap().remove("schema_version");
    fs::write(&path, v.to_string()).unwrap();
    assert!(read_report(&path).unwrap_err().to_string().contains("missing schema_version"));
}
