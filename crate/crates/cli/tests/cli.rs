use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cotrans"))
}

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).arg("--quiet").output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn spec_run(command: &str, spec: &Path) -> (i32, Value) {
    let (code, stdout, stderr) = run(&[command, "--spec", spec.to_str().unwrap()]);
    let json = serde_json::from_str(&stdout).unwrap_or_else(|e| panic!("{command} {spec:?}: {e}\n{stderr}"));
    (code, json)
}

#[test]
fn golden_exit_codes() {
    let (code, report) = spec_run("verify-cotranslation", &manifest("tests/golden/pass.json"));
    assert_eq!(code, 0);
    assert_eq!(report["passed"], true);

    let (code, report) = spec_run("check-relations", &manifest("tests/golden/check_failure.json"));
    assert_eq!(code, 1);
    let failing = report["checks"].as_array().unwrap().iter().find(|c| c["passed"] == false).unwrap();
    assert_eq!(failing["name"], "relator a^3");
    let witness = failing["witnesses"][0]["description"].as_str().unwrap();
    assert!(witness.contains("base"), "{witness}");
    assert!(failing["witnesses"][0]["residual"].as_f64().unwrap() > 0.0);

    let (code, stdout, stderr) = run(&["verify-cotranslation", "--spec", manifest("tests/golden/schema_error.json").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stdout.is_empty());
    assert!(stderr.contains("seed"), "{stderr}");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for (command, spec) in [
        ("verify-cotranslation", "tests/golden/pass.json"),
        ("difference", "specs/random_difference.json"),
        ("complete", "specs/c6_random_partial.json"),
    ] {
        let spec = manifest(spec);
        let a = run(&[command, "--spec", spec.to_str().unwrap()]);
        let b = run(&[command, "--spec", spec.to_str().unwrap()]);
        assert_eq!(a.1, b.1, "{command}");
        assert!(!a.1.is_empty());
    }
}

#[test]
fn every_shipped_spec_runs() {
    let cases = [
        ("verify-groupoid", "d6_groupoid", 0),
        ("verify-groupoid", "d6_groupoid_reversed", 1),
        ("verify-cotranslation", "c2_table", 0),
        ("check-relations", "c2_table", 0),
        ("check-relations", "c3_broken_relation", 1),
        ("skew-verify", "dinf_skew", 0),
        ("skew-verify", "c2_table", 0),
        ("evaluate", "c3_affine_evaluate", 0),
        ("difference", "random_difference", 0),
        ("evolve", "rotation_evolve", 0),
        ("derivative-identities", "sin_cos_identities", 0),
        ("partial-verify", "c6_random_partial", 0),
        ("complete", "c6_random_partial", 0),
        ("factorize", "integers_random_partial", 0),
    ];
    for (command, spec, expected) in cases {
        let (code, report) = spec_run(command, &manifest(&format!("specs/{spec}.json")));
        assert_eq!(code, expected, "{command} {spec}: {report:#}");
        assert_eq!(report["command"], command);
        assert_eq!(report["passed"], expected == 0);
    }
}

#[test]
fn evaluate_prints_affine_coefficients() {
    let (_, report) = spec_run("evaluate", &manifest("specs/c3_affine_evaluate.json"));
    assert_eq!(report["results"]["affine"]["A"][0][0], 2.0);
    assert_eq!(report["results"]["affine"]["b"][0], 2.0);
    assert_eq!(report["results"]["image"]["vector"][0], 8.0);
}

#[test]
fn gallery_spec_feeds_verification() {
    let dir = std::env::temp_dir().join(format!("cotrans-gallery-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let spec = dir.join("c3.json");
    let (code, _, _) = run(&["gallery", "c3_affine", "--out", spec.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, report) = spec_run("verify-cotranslation", &spec);
    assert_eq!(code, 0);
    assert_eq!(report["results"]["triples"], 27);

    let (code, stdout, _) = run(&["gallery"]);
    assert_eq!(code, 0);
    let listing: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(listing["results"]["examples"].as_array().unwrap().len(), 9);
    assert_eq!(run(&["gallery", "no_such_example"]).0, 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn overrides_replace_spec_values() {
    let spec = manifest("specs/random_difference.json");
    let (_, stdout, _) = run(&["difference", "--spec", spec.to_str().unwrap(), "--seed", "99", "--tol", "0"]);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["seed"], 99);
    assert_eq!(report["passed"], false);

    let spec = manifest("specs/dinf_skew.json");
    let (_, stdout, _) = run(&["skew-verify", "--spec", spec.to_str().unwrap(), "--radius", "1"]);
    let report: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["results"]["pairs"], 9);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["verify-cotranslation"]).0, 2);
    assert_eq!(run(&["not-a-command"]).0, 2);
    let spec = manifest("tests/golden/pass.json");
    assert_eq!(run(&["verify-cotranslation", "--spec", spec.to_str().unwrap(), "--radius", "x"]).0, 2);
    let out = bin()
        .args(["verify-cotranslation", "--quiet", "--spec", spec.to_str().unwrap()])
        .env("COTRANS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["verify-cotranslation", "--quiet", "--spec", spec.to_str().unwrap()])
        .env("COTRANS_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn runtime_errors_fail_with_a_report() {
    let dir = std::env::temp_dir().join(format!("cotrans-runtime-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let spec = dir.join("singular.json");
    std::fs::write(
        &spec,
        r#"{"seed":0,"sequence":{"periodic":[[[1.0]],[[0.0]]]},"options":{"pairs":[[0,4]]}}"#,
    )
    .unwrap();
    let (code, report) = spec_run("difference", &spec);
    assert_eq!(code, 1);
    assert!(report["error"].as_str().unwrap().contains("singular"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn timing_is_opt_in() {
    let spec = manifest("tests/golden/pass.json");
    let (_, plain, _) = run(&["verify-cotranslation", "--spec", spec.to_str().unwrap()]);
    assert!(!plain.contains("elapsed_ms"));
    let (_, timed, _) = run(&["verify-cotranslation", "--spec", spec.to_str().unwrap(), "--timing"]);
    assert!(timed.contains("elapsed_ms"));
}
