use std::path::Path;
use std::process::{Command, Output};

use sphere_eq::config::{octahedron, tbp};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphere-eq"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// CSV body with the manifest timestamp line removed.
fn body_without_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# timestamp:"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn field(text: &str, prefix: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(prefix))
        .unwrap_or_else(|| panic!("no line starting with {prefix:?} in\n{text}"))
        .trim()
        .parse()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, c: &sphere_eq::Configuration) -> String {
    let path = dir.join(name);
    c.write_json(&path).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn energy_of_tbp_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_config(dir.path(), "tbp.json", &tbp());
    let out = run(&["energy", &file]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!((field(&text, "direct energy:") - 6.75).abs() <= 1e-12);
    assert!((field(&text, "spectral energy:") - 6.75).abs() <= 1e-12);
    assert!(field(&text, "difference:") <= 1e-10);
}

#[test]
fn energy_of_octahedron_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_config(dir.path(), "oct.json", &octahedron());
    let out = run(&["energy", &file, "--json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // twelve pairs at 0 and three at -1
    assert!((doc["direct"].as_f64().unwrap() - 12.0).abs() <= 1e-12);
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let off = dir.path().join("off.json");
    std::fs::write(&off, r#"{"n": 2, "m": 3, "points": [[1, 0, 0], [0, 1.001, 0]]}"#).unwrap();
    assert_eq!(run(&["energy", off.to_str().unwrap()]).status.code(), Some(2));

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "not json").unwrap();
    assert_eq!(run(&["energy", garbage.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(run(&["energy", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(run(&["cauchy", "--m", "7"]).status.code(), Some(2));
    assert_eq!(run(&["search", "--tol", "1e-12", "--starts", "1"]).status.code(), Some(2));
}

#[test]
fn quick_verify_passes() {
    let out = run(&["verify", "--quick"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.ends_with(",true") || l.contains(",true,")).count(), 11);
}

#[test]
fn corrupted_certificate_fails_verify() {
    let out = run(&["verify", "--quick", "--corrupt-certificate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("failed: 7 (degree-26 certificate)"));
}

#[test]
fn search_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let best = dir.path().join("best.json");
    let args = ["search", "--starts", "40", "--seed", "5"];
    let o1 = bin()
        .args(args)
        .args(["--out", a.to_str().unwrap(), "--best-out", best.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o1.status.success(), "{}", stderr(&o1));
    let o2 = bin()
        .env("SPHERE_EQ_THREADS", "1")
        .args(args)
        .args(["--out", b.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o2.status.success());
    let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(body_without_timestamp(&ta), body_without_timestamp(&tb));
    assert!(ta.contains("label,energy,residual,count,fingerprint"));
    assert!(ta.lines().any(|l| l.starts_with("TBP,")));
    let winner = sphere_eq::Configuration::read_json(&best).unwrap();
    let e = sphere_eq::energy(&winner, &sphere_eq::Potential::biquadratic()).unwrap();
    assert!((e - 6.75).abs() <= 1e-8);
}

#[test]
fn bad_thread_count_exits_2() {
    let out = bin().env("SPHERE_EQ_THREADS", "zero").args(["cauchy", "--instances", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn special_case_reports_two_solutions() {
    let out = run(&["special-case", "--starts", "100"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("symmetric_branch,")).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("symmetric_branch,TBP,-5.0000000000000000e-1"));
    assert!(rows[1].starts_with("symmetric_branch,FP,-2.86366112162914"));
    assert!(text.contains("certificate,HOLDS"));
    assert!(text.contains("asymmetric_multistart,NONE"));
}

#[test]
fn cauchy_json_report() {
    let out = run(&["cauchy", "--instances", "50", "--format", "json", "--seed", "2"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["manifest"]["command"], "cauchy");
    let records = doc["report"].as_array().unwrap();
    assert_eq!(records.len(), 50);
    for r in records {
        assert!(r["scaled_magnitude"].as_f64().unwrap() > 1e-12);
    }
}
