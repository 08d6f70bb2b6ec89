use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pointline::io::{parse_csv_str, read_config, write_config};
use pointline::{min_distance_bruteforce, trivial_configuration, ConfigElement, Configuration};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pointline"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stacked_base(dir: &Path, ys: &[f64]) -> PathBuf {
    let config = Configuration::new(
        ys.iter().map(|&y| ConfigElement::new(0.0, y, 0.0)).collect(),
        None,
        "stacked",
    )
    .unwrap();
    let path = dir.join("base.json");
    write_config(&path, &config, false).unwrap();
    path
}

#[test]
fn build_random_reaches_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let report = dir.path().join("r.json");
    let o = run(&[
        "build-random", "--delta", "1e-3", "--seed", "7", "--out", s(&out), "--report", s(&report),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let config = read_config(&out).unwrap();
    assert!(config.len() >= 345);
    let d = min_distance_bruteforce(&config).unwrap().value;
    assert!(d > 1e-3);
    assert_eq!(config.claimed_delta(), Some(d));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["size"], config.len());
    assert_eq!(json["random"]["n_points"], 690);
    assert_eq!(stdout(&o), std::fs::read_to_string(&report).unwrap());

    let v = run(&["verify", s(&out)]);
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert!(stdout(&v).ends_with("PASS\n"));
}

#[test]
fn build_random_rejects_large_delta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let o = run(&["build-random", "--delta", "0.5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("delta too large"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn compose_three_stacked_lines() {
    let dir = tempfile::tempdir().unwrap();
    let base = stacked_base(dir.path(), &[-3.0 / 32.0, 0.0, 3.0 / 32.0]);
    let out = dir.path().join("x.json");
    let o = run(&[
        "compose", "--base", s(&base), "--w", "1/8", "--C", "5", "--out", s(&out), "--labels",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let config = read_config(&out).unwrap();
    assert_eq!(config.len(), 45);
    assert_eq!(config.labels().unwrap().len(), 45);
    assert_eq!(
        config.claimed_delta(),
        Some(min_distance_bruteforce(&config).unwrap().value)
    );
    assert!(stderr(&o).contains("level"));

    let two = dir.path().join("x2.json");
    let o = run(&[
        "compose", "--base", s(&base), "--w", "1/8", "--depth", "2", "--out", s(&two),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_config(&two).unwrap().len(), 2025);
}

#[test]
fn compose_guaranteed_checks_constants() {
    let dir = tempfile::tempdir().unwrap();
    let base = stacked_base(dir.path(), &[-0.79, 0.0, 0.79]);
    let out = dir.path().join("x.json");
    let o = run(&[
        "compose", "--base", s(&base), "--w", "1/128", "--C", "2", "--mode", "guaranteed",
        "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("C >= 5"), "{}", stderr(&o));

    let o = run(&[
        "compose", "--base", s(&base), "--w", "1/128", "--C", "5", "--mode", "guaranteed",
        "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let config = read_config(&out).unwrap();
    assert_eq!(config.len(), 765);
    assert_eq!(config.claimed_delta(), Some(2f64.powi(-14)));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["cases"]["violations"], 0);
    assert_eq!(report["success"], true);
}

#[test]
fn compose_guaranteed_rejects_weak_base() {
    let dir = tempfile::tempdir().unwrap();
    let base = stacked_base(dir.path(), &[-0.05, 0.0, 0.05]);
    let out = dir.path().join("x.json");
    let o = run(&[
        "compose", "--base", s(&base), "--w", "1/128", "--mode", "guaranteed", "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("d(X0)"), "{}", stderr(&o));
}

#[test]
fn verify_trivial_and_singleton() {
    let dir = tempfile::tempdir().unwrap();
    let ten = dir.path().join("t10.json");
    let o = run(&["trivial", "--n", "10", "--out", s(&ten)]);
    assert!(o.status.success());
    assert_eq!(read_config(&ten).unwrap().claimed_delta(), Some(0.2));
    let v = run(&["verify", s(&ten), "--exact"]);
    assert_eq!(v.status.code(), Some(0));
    let text = stdout(&v);
    assert!(text.contains("d(X) = 0.2\n"), "{text}");
    let w = min_distance_bruteforce(&read_config(&ten).unwrap()).unwrap();
    let line = format!("witness = point {} to line {}\n", w.index_a, w.index_b);
    assert!(text.contains(&line), "{text}");

    let one = dir.path().join("t1.json");
    assert!(run(&["trivial", "--n", "1", "--out", s(&one)]).status.success());
    let v = run(&["verify", s(&one)]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains("degenerate"));
}

#[test]
fn verify_reports_violation_and_missing_claim() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.json");
    let t = trivial_configuration(5).unwrap().with_claim(Some(0.5));
    write_config(&path, &t, false).unwrap();
    let v = run(&["verify", s(&path)]);
    assert_eq!(v.status.code(), Some(1));
    assert!(stdout(&v).ends_with("FAIL\n"));

    write_config(&path, &t.with_claim(None), false).unwrap();
    let v = run(&["verify", s(&path)]);
    assert_eq!(v.status.code(), Some(2));

    let v = run(&["verify", s(&path), "--sampled"]);
    assert_eq!(v.status.code(), Some(2));
    assert!(stderr(&v).contains("--exact"));
}

#[test]
fn io_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["verify", s(&missing)]).status.code(), Some(3));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"format_version\": 9}").unwrap();
    assert_eq!(run(&["verify", s(&bad)]).status.code(), Some(3));
}

#[test]
fn export_svg_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let base = stacked_base(dir.path(), &[-3.0 / 32.0, 0.0, 3.0 / 32.0]);
    let x = dir.path().join("x.json");
    assert!(run(&["compose", "--base", s(&base), "--w", "1/8", "--out", s(&x)])
        .status
        .success());
    let svg = dir.path().join("x.svg");
    let csv = dir.path().join("x.csv");
    let o = run(&["export", s(&x), "--svg", s(&svg), "--csv", s(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<circle").count(), 45);
    assert_eq!(text.matches("<line ").count(), 45);
    assert_eq!(text.matches("<polygon").count(), 0);

    let back = parse_csv_str(&std::fs::read_to_string(&csv).unwrap(), "csv").unwrap();
    assert_eq!(back.elements(), read_config(&x).unwrap().elements());

    let banded = dir.path().join("b.svg");
    assert!(run(&["export", s(&x), "--svg", s(&banded), "--strip-width", "1/1000"])
        .status
        .success());
    let text = std::fs::read_to_string(&banded).unwrap();
    assert_eq!(text.matches("<polygon").count(), 45);
}

#[test]
fn search_base_writes_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = run(&[
        "search-base", "--k", "3", "--delta-target", "0.6", "--restarts", "2", "--steps", "3000",
        "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let config = read_config(&out).unwrap();
    assert_eq!(config.len(), 3);
    assert!(config.claimed_delta().unwrap() >= 0.6);
    assert_eq!(run(&["verify", s(&out)]).status.code(), Some(0));

    let o = run(&["search-base", "--k", "3", "--delta-target", "5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}
