use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gevrey-fde"))
}

fn problems() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_problem(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn example(name: &str) -> String {
    problems().join(format!("{name}.json")).to_string_lossy().into_owned()
}

fn read_csv(path: &Path) -> Vec<[f64; 3]> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,u,residual"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect()
}

#[test]
fn check_example2_passes() {
    let out = run(&["check", &example("example2")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    let c = &report["conditions"];
    let theta = c["theta"].as_f64().unwrap();
    assert!((theta - 0.10204164966613).abs() < 1e-12);
    assert!((c["cond2_lhs"].as_f64().unwrap() - 0.02).abs() <= 1e-10);
    assert!(c["r0_bracket"]["lo"].is_f64());
}

#[test]
fn check_example1_passes() {
    assert_eq!(code(&run(&["check", &example("example1")])), 0);
}

#[test]
fn check_rejects_bad_d() {
    let dir = TempDir::new().unwrap();
    let path = write_problem(
        &dir,
        "bad.json",
        r#"{"k":1,"d":3,"c":0,"P":[0,0,1],"a":"1","b":"0","psi":"t"}"#,
    );
    let out = run(&["check", &path]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("d outside [-1, 1]"));
}

#[test]
fn input_errors_exit_4() {
    let dir = TempDir::new().unwrap();
    let unknown = write_problem(
        &dir,
        "u.json",
        r#"{"k":1,"d":0,"c":0,"P":[1],"a":"1","b":"0","psi":"t","mu2":1}"#,
    );
    assert_eq!(code(&run(&["check", &unknown])), 4);
    let syntax = write_problem(
        &dir,
        "s.json",
        r#"{"k":1,"d":0,"c":0,"P":[1],"a":"sin(t","b":"0","psi":"t"}"#,
    );
    let out = run(&["check", &syntax]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("offset 5"));
    assert_eq!(code(&run(&["check", "/nonexistent/problem.json"])), 4);
    assert_eq!(code(&run(&["frobnicate"])), 4);
}

#[test]
fn solve_example2_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("u.csv");
    let out = run(&["solve", &example("example2"), "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&csv);
    assert_eq!(rows.len(), 1001);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0], -1.0 + 2.0 * i as f64 / 1000.0);
        assert!(row[2] <= 1e-10);
    }
    assert_eq!(rows[500][0], 0.0);
    assert!((rows[500][1] - 0.01).abs() <= 1e-12);
    let report = json(&out);
    assert_eq!(report["solve"]["converged"], Value::Bool(true));
    assert!(report.get("timing").is_none());
}

#[test]
fn solve_example1_zero_at_origin() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("u.csv");
    let out = run(&["solve", &example("example1"), "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let rows = read_csv(&csv);
    assert!(rows[500][1].abs() <= 1e-12);
}

#[test]
fn ode_oracle_needs_force() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("u.csv");
    assert_eq!(code(&run(&["solve", &example("ode_oracle")])), 2);
    let out = run(&["solve", &example("ode_oracle"), "--force", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let worst = read_csv(&csv).iter().map(|r| r[2]).fold(0.0f64, f64::max);
    assert!(worst <= 1e-8, "residual {worst}");
    assert_eq!(json(&out)["solve"]["out_of_theorem"], Value::Bool(true));
}

#[test]
fn non_convergence_exits_3() {
    let out = run(&["solve", &example("example2"), "--max-iter", "2"]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&out)["solve"]["converged"], Value::Bool(false));
}

#[test]
fn keep_iterates_reports_diagnostics() {
    let out = run(&["solve", &example("example2"), "--keep-iterates", "--timing"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    let diag = &report["diagnostics"];
    assert_eq!(diag["probe"]["all_within"], Value::Bool(true));
    assert_eq!(diag["omega"]["bounded"], Value::Bool(true));
    assert_eq!(diag["omega"]["values"].as_array().unwrap().len(), 200);
    assert!(report["timing"]["solve_s"].is_f64());
}

#[test]
fn require_ek_blocks_failing_psi() {
    let dir = TempDir::new().unwrap();
    let path = write_problem(
        &dir,
        "sq.json",
        r#"{"k":1,"d":0,"c":0.01,"P":[0,0,1],"a":"0.5","b":"0.1","psi":"t^2"}"#,
    );
    assert_eq!(code(&run(&["solve", &path])), 0);
    assert_eq!(code(&run(&["solve", &path, "--require-ek"])), 2);
}

#[test]
fn ek_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ident = write_problem(
        &dir,
        "id.json",
        r#"{"k":1,"d":0,"c":0,"P":[0,0,1],"a":"1","b":"0","psi":"t"}"#,
    );
    let double = write_problem(
        &dir,
        "dbl.json",
        r#"{"k":1,"d":0,"c":0,"P":[0,0,1],"a":"1","b":"0","psi":"2*t"}"#,
    );
    let out = run(&["ek", &example("example2"), "--A", "0.5", "--pmax", "100"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["entries"].as_array().unwrap().len(), 100);
    assert_eq!(code(&run(&["ek", &ident, "--A", "0.1,0.9"])), 0);
    assert_eq!(code(&run(&["ek", &double])), 2);
}

#[test]
fn gevrey_example2_resolves() {
    let out = run(&["gevrey", &example("example2")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let g = &json(&out)["diagnostics"]["gevrey"];
    assert!(g["classification"]["kind"].is_string());
    assert!(g["slope"].as_f64().unwrap().is_finite());
}

#[test]
fn gevrey_selftest_and_unresolved() {
    assert_eq!(code(&run(&["gevrey", "--selftest"])), 0);
    let dir = TempDir::new().unwrap();
    // u = c + x: every derivative beyond the first vanishes
    let linear = write_problem(
        &dir,
        "lin.json",
        r#"{"k":1,"d":0,"c":0.1,"P":[0,0,1],"a":"0","b":"1","psi":"t"}"#,
    );
    assert_eq!(code(&run(&["gevrey", &linear, "--force"])), 3);
    assert_eq!(code(&run(&["gevrey", &linear])), 2);
}

#[test]
fn reproduce_lines_and_codes() {
    let out = run(&["reproduce", "example1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS example1 theta"));
    assert!(text.contains("NOTE example1 bound"));

    let out = run(&["reproduce", "example2"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS example2 cond2_lhs"));
    assert!(text.contains("NOTE example2 b"));
    // theta and gap fall outside the reference brackets
    assert!(text.contains("FAIL example2 theta"));
    assert_eq!(code(&out), 3);

    let all = String::from_utf8_lossy(&run(&["reproduce", "all"]).stdout).into_owned();
    assert!(all.find("example1").unwrap() < all.find("example2").unwrap());
}

#[test]
fn reports_are_byte_stable() {
    let a = run(&["solve", &example("example2"), "--keep-iterates"]);
    let b = run(&["solve", &example("example2"), "--keep-iterates"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("reproduce"));
}
