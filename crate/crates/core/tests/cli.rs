use std::process::{Command, Output};

use serde_json::Value;

fn verify(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_verify"));
    cmd.args(args).env_remove("VERIFY_SEED");
    if let Some(s) = seed_env {
        cmd.env("VERIFY_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn canonical(path: &std::path::Path) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["runtime_ms"] = Value::from(0);
    v
}

#[test]
fn list_prints_sixteen_anchored_suites() {
    let out = verify(&["list"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 16);
    for line in lines {
        let (name, anchor) = line.split_once('\t').unwrap();
        assert!(!name.is_empty() && !anchor.trim().is_empty());
    }
}

#[test]
fn catalog_matches_readme_table() {
    let readme = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md")).unwrap();
    for s in stiefel_actions::verify::list_suites() {
        let row = format!("| `{}` | {} |", s.name, s.anchor);
        assert!(readme.contains(&row), "README lacks row for {}", s.name);
    }
}

#[test]
fn unknown_suite_exits_2_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    let out = verify(&["no-such-suite", "--out", out_path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_path.exists());
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["metric-bounds", "--trials", "0"][..],
        &["metric-bounds", "--tol", "bound"][..],
        &["metric-bounds", "--tol", "bound=-1"][..],
        &["metric-bounds", "--tol", "unheard_of=1e-3"][..],
        &["metric-bounds", "--n", "3", "--p", "3"][..],
        &["metric-bounds", "--seed", "-4"][..],
        &[][..],
    ] {
        assert_eq!(verify(args, None).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(verify(&["metric-bounds", "--trials", "5"], Some("not-a-seed")).status.code(), Some(2));
}

#[test]
fn passing_suite_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let out = verify(
        &[
            "metric-bounds",
            "--trials",
            "300",
            "--n",
            "7",
            "--p",
            "2",
            "--out",
            json.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let report = canonical(&json);
    assert_eq!(report["suite_name"], "metric-bounds");
    assert_eq!(report["passed"], true);
    assert_eq!(report["config"]["dims"]["n"], 7);
    assert_eq!(report["config"]["trials"], 300);
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["margin"].as_f64().unwrap() > 0.0));
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), checks.len() + 1);
    assert!(rows.starts_with("suite,check_id,value,bound,margin"));
}

#[test]
fn failing_suite_exits_1_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let out = verify(
        &["geodesic-crossval", "--trials", "4", "--tol", "crossval=1e-300", "--out", json.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    let report = canonical(&json);
    assert_eq!(report["passed"], false);
    assert!(report["witness"]["inputs"].is_object());
}

#[test]
fn reports_are_byte_identical_modulo_runtime() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str], env: Option<&str>| {
        let path = dir.path().join(name);
        let mut args = vec!["kaehler-bounds", "--trials", "40", "--out", path.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert_eq!(verify(&args, env).status.code(), Some(0));
        canonical(&path)
    };
    let a = run("a.json", &["--seed", "11"], None);
    let b = run("b.json", &["--seed", "11"], None);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let env = run("c.json", &["--seed", "5"], Some("11"));
    assert_eq!(a, env, "VERIFY_SEED overrides --seed");
    let other = run("d.json", &["--seed", "12"], None);
    assert_ne!(a, other);
}

#[test]
fn all_runs_the_registry() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("all.json");
    let out = verify(&["all", "--trials", "10", "--out", json.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 16);
    assert!(reports.iter().all(|r| r["passed"] == true));
}
