use std::path::Path;
use std::process::{Command, Output};

fn hyperdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperdyn")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

#[test]
fn check_prints_a_verdict() {
    let out = hyperdyn(&["check", "--system", "rot5", "--property", "transitive", "--level", "product"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("rot5_1 product transitive (n=2):"), "{text}");
    assert!(text.contains("Fails"), "{text}");
}

#[test]
fn check_json_is_parseable() {
    let out = hyperdyn(&["check", "--system", "shift2", "--property", "mixing", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(value.is_object());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["check", "--system", "rot5", "--property", "chaotic"][..],
        &["check", "--system", "nonesuch", "--property", "transitive"],
        &["check", "--system", "rot5", "--property", "transitive", "--horizon", "0"],
        &["verify", "--catalog", "rot5", "--theorems", "T99"],
        &["verify", "--catalog", "rot5", "--theorems", "T1", "--format", "xml"],
        &["enumerate", "--points", "9"],
        &["frobnicate"],
    ] {
        assert_eq!(hyperdyn(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(hyperdyn(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let out = hyperdyn(&["verify", "--catalog", "rot5,shift2", "--theorems", "T5,T12", "--out", path_str(&json)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let results = report["results"].as_array().unwrap();
    assert!(!results.is_empty());
    assert!(results.iter().all(|r| r["status"] != "counterexample"));
    assert!(results.iter().any(|r| r["theorem"] == "T5" && r["system"] == "shift2"));

    let csv = dir.path().join("r.csv");
    let out = hyperdyn(&["verify", "--catalog", "rot5", "--theorems", "T5", "--out", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("theorem,system,n,arrow,premise,conclusion,status,witness"), "{text}");
}

#[test]
fn verify_reads_system_files_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let system = dir.path().join("swap.sys");
    std::fs::write(&system, "name = swap\npoints = 2\nmap = 0:1 1:0\nmetric = discrete\n").unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(&config, "catalog = id2\ntheorems = T1\nhorizon = 16\n").unwrap();
    let out = hyperdyn(&[
        "verify",
        "--config",
        path_str(&config),
        "--system-file",
        path_str(&system),
        "--format",
        "markdown",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("swap"), "{text}");
    assert!(text.contains("id2"), "{text}");
    assert!(!text.contains("rot4"), "config catalog ignored: {text}");
}

#[test]
fn check_accepts_a_system_file() {
    let dir = tempfile::tempdir().unwrap();
    let system = dir.path().join("swap.sys");
    std::fs::write(&system, "name = swap\npoints = 2\nmap = 0:1 1:0\nmetric = discrete\n").unwrap();
    let out = hyperdyn(&["check", "--system", path_str(&system), "--property", "transitive"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("Holds"), "{}", stdout(&out));
}

#[test]
fn enumerate_small_maps() {
    let out = hyperdyn(&["enumerate", "--points", "2", "--theorems", "T5"]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("4 maps on 2 points, 0 counterexamples"), "{stderr}");
}

#[test]
fn metric_selftest_passes() {
    let out = hyperdyn(&["metric-selftest", "--catalog", "rot5,collapse4", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().count() >= 12);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}
