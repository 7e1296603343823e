//! The binary end to end on small registers.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqc-wta"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .env_remove("AQC_WTA_OUT")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn pipeline(dir: &Path) {
    let inst = dir.join("instance.json");
    let inst = inst.to_str().unwrap();
    ok(dir, &["generate", "-m", "3", "-n", "2", "--seed", "5"]);
    ok(dir, &["compile", "--instance", inst]);
    ok(dir, &["solve", "--instance", inst]);
    ok(
        dir,
        &["simulate", "--instance", inst, "-t", "5", "-t", "10", "--final", "both", "--samples", "6"],
    );
    ok(dir, &["spectrum", "--instance", inst, "-t", "5", "--samples", "6", "--svg"]);
}

#[test]
fn full_pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    for f in [
        "instance.json",
        "qubo.json",
        "ising.json",
        "solve.json",
        "simulate.json",
        "populations_quadratic_T5.csv",
        "populations_exact_T10.csv",
        "final_quadratic_T10.csv",
        "spectrum.json",
        "spectrum_quadratic.csv",
        "spectrum_quadratic.svg",
    ] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let csv = fs::read_to_string(dir.path().join("populations_quadratic_T5.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("t,norm,p_"));
    assert_eq!(csv.lines().count(), 7);
    let spec = fs::read_to_string(dir.path().join("spectrum_quadratic.csv")).unwrap();
    assert!(spec.starts_with("t,lambda_0,lambda_1,"));
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    pipeline(a.path());
    pipeline(b.path());
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for name in names {
        let (x, y) = (fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
        // paths inside the JSON reports differ between the two directories
        let strip = |bytes: Vec<u8>, dir: &Path| {
            String::from_utf8(bytes)
                .unwrap()
                .replace(dir.to_str().unwrap(), "<dir>")
        };
        assert_eq!(strip(x, a.path()), strip(y, b.path()), "{name:?} differs");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"generator": {"m": 2, "n": 2, "seed": 9}}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let stdout = ok(dir.path(), &["--config", cfg, "generate"]);
    assert!(stdout.contains("N = 4, K = 16"), "{stdout}");
    let stdout = ok(dir.path(), &["--config", cfg, "generate", "-n", "3"]);
    assert!(stdout.contains("N = 6, K = 64"), "{stdout}");
}

#[test]
fn json_flag_prints_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["--json", "solve", "-m", "2", "-n", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["weapons"], 2);
    assert_eq!(v["agreement"]["ce_matches_wta"], true);
}

#[test]
fn errors_carry_a_category_and_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["solve", "-m", "5", "-n", "5"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error[too-large]:"), "{err}");
    assert!(err.contains("cross-entropy"));

    let out = run(dir.path(), &["spectrum", "-m", "2", "-n", "2", "-k", "1"]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[invalid-config]:"));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"m": 1, "n": 1, "values": [1.0], "probs": [[1.5]]}"#).unwrap();
    let out = run(dir.path(), &["compile", "--instance", bad.to_str().unwrap()]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error[invalid-input]:"), "{err}");
    assert!(err.contains("probs[0][0]"), "{err}");

    let out = run(dir.path(), &["simulate", "-m", "5", "-n", "4"]);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[too-large]:"));
}

#[test]
fn large_instances_fall_back_to_cross_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["solve", "-m", "6", "-n", "6", "--no-brute-force"]);
    assert!(stdout.contains("cross-entropy"));
}
