use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn chi2(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chi2"))
        .env_remove("CHI2_REPORT_DIR")
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("spawn chi2")
}

fn report(dir: &Path, suite: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{suite}.json"))).unwrap()).unwrap()
}

#[test]
fn closure_on_h2_is_full() {
    let dir = TempDir::new().unwrap();
    let out = chi2(dir.path(), &["closure", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "closure");
    assert_eq!(r["details"]["closure"]["dim"], 9);
    assert_eq!(r["pass"], true);
    assert!(dir.path().join("closure.timing.json").exists());
}

#[test]
fn bad_tolerance_is_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(chi2(dir.path(), &["closure", "--n", "2", "--tol", "not-a-number"]).status.code(), Some(2));
    assert_eq!(chi2(dir.path(), &["closure", "--n", "2", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(chi2(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(chi2(dir.path(), &["verify", "lambda3z", "--berry", "2"]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        assert_eq!(chi2(dir.path(), &["verify", "lambda2z"]).status.code(), Some(0));
        assert_eq!(chi2(dir.path(), &["--seed", "5", "synthesize", "--problem", data("su3_random.json").to_str().unwrap()]).status.code(), Some(0));
    }
    for file in ["lambda2z.json", "synthesize.json", "synthesize.sequence.json"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
    assert_eq!(report(a.path(), "synthesize")["seed"], 5);
}

#[test]
fn report_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_chi2"))
        .env("CHI2_REPORT_DIR", dir.path())
        .args(["closure", "--n", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(dir.path(), "closure")["details"]["closure"]["dim"], 4);
}

#[test]
fn lambda3z_berry_sign() {
    let dir = TempDir::new().unwrap();
    assert_eq!(chi2(dir.path(), &["verify", "lambda3z"]).status.code(), Some(0));
    let r = report(dir.path(), "lambda3z");
    assert_eq!(r["details"]["berry"], -1.0);
    assert_eq!(chi2(dir.path(), &["verify", "lambda3z", "--berry", "+1", "--dump-unitary"]).status.code(), Some(0));
    let r = report(dir.path(), "lambda3z");
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["id"] == "identity_corrections" && c["pass"] == true));
    assert!(dir.path().join("lambda3z.unitary.json").exists());
}

#[test]
fn h2_table_mismatch_is_a_check_failure() {
    let dir = TempDir::new().unwrap();
    let out = chi2(dir.path(), &["verify", "h2-matrices"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(dir.path(), "h2-matrices");
    let failed: Vec<&str> = r["checks"].as_array().unwrap().iter().filter(|c| c["pass"] == false).map(|c| c["id"].as_str().unwrap()).collect();
    for ok in ["G2_entrywise", "G3_entrywise", "G8_entrywise", "G9_entrywise", "g9_identity"] {
        assert!(!failed.contains(&ok), "{ok}");
    }
    // Ladder build puts +i√2/2 at G1[0][2]; the table has the opposite sign, which
    // propagates into every bracket-derived generator.
    assert!(failed.contains(&"G1_entrywise"));
}

#[test]
fn injection_suite_passes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(chi2(dir.path(), &["verify", "injection"]).status.code(), Some(0));
    assert_eq!(report(dir.path(), "injection")["details"]["ladder"]["n_target"], 3);
}

#[test]
fn trotter_writes_curve() {
    let dir = TempDir::new().unwrap();
    assert_eq!(chi2(dir.path(), &["trotter", "--n", "2", "--theta", "0.7", "--m-max", "32"]).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("trotter.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "m,distance");
    assert_eq!(lines.len(), 7);
    assert!(lines[6].starts_with("32,"));
    assert_eq!(chi2(dir.path(), &["trotter", "--n", "1"]).status.code(), Some(2));
}

#[test]
fn synthesize_then_replay() {
    let dir = TempDir::new().unwrap();
    let problem = data("ladder_rung.json");
    assert_eq!(chi2(dir.path(), &["synthesize", "--problem", problem.to_str().unwrap()]).status.code(), Some(0));
    let seq = dir.path().join("synthesize.sequence.json");
    let out = chi2(dir.path(), &["replay", "--problem", problem.to_str().unwrap(), "--sequence", seq.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(dir.path(), "replay")["pass"], true);
}

#[test]
fn malformed_problems_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    for name in ["unknown_field.json", "truncated.json", "does_not_exist.json"] {
        let out = chi2(dir.path(), &["synthesize", "--problem", data(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(!out.stderr.is_empty());
    }
}
