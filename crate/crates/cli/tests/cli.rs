use std::path::Path;
use std::process::{Command, Output};

use vne_cli::{parse_scenario, run_scenario_text, Overrides, Report, BUNDLED};

const DIAGONAL_Z2: &str = r#"{
  "schema": 1,
  "groups": {"z2": {"type": "cyclic", "n": 2}},
  "couplings": {"d": {"type": "diagonal", "group": "z2"}},
  "multipliers": {"e": {"type": "delta", "group": "z2", "at": 0}},
  "tasks": [{"type": "verify", "coupling": "d", "multiplier": "e"}]
}"#;

fn quiet() -> Overrides {
    Overrides {
        no_timestamp: true,
        ..Overrides::default()
    }
}

fn bundled(name: &str) -> &'static str {
    BUNDLED.iter().find(|(n, _)| *n == name).unwrap().1
}

fn vne(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vne")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn diagonal_verify_has_zero_margin() {
    let r = run_scenario_text(DIAGONAL_Z2, &quiet()).unwrap();
    assert!(r.all_passed());
    assert_eq!(r.exit_code(), 0);
    let t = r.task(0).unwrap();
    assert_eq!(t.values["contractivity_margin"].as_f64(), Some(0.0));
}

#[test]
fn wstar_report_contains_the_kernel_row() {
    let r = run_scenario_text(bundled("wstar_z4_klein.json"), &quiet()).unwrap();
    let row: Vec<f64> = r.task(0).unwrap().values["kernel"][1]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (a, b) in row.iter().zip([0.0, 0.0, 0.5, 0.5]) {
        assert!((a - b).abs() <= 1e-10);
    }
    assert_eq!(r.task(0).unwrap().values["pairing"], serde_json::json!([0, 1, 2, 3]));
    assert_eq!(r.task(1).unwrap().values["pairing"], serde_json::json!([0, 2, 1, 3]));
}

#[test]
fn every_bundled_scenario_passes() {
    for (name, text) in BUNDLED {
        let r = run_scenario_text(text, &quiet()).unwrap();
        assert!(r.all_passed(), "{name}: {}", r.to_json());
        assert_eq!(r.summary.tasks, parse_scenario(text).unwrap().tasks.len());
    }
}

#[test]
fn json_round_trips_and_csv_counts_scalars() {
    let r = run_scenario_text(bundled("me_product_z3_z5.json"), &Overrides::default()).unwrap();
    assert!(r.generated_at.is_some());
    assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
    let csv = r.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("task,quantity,value,threshold,pass"));
    assert_eq!(lines.count(), r.scalar_count());
}

#[test]
fn digest_tracks_content() {
    let a = run_scenario_text(DIAGONAL_Z2, &quiet()).unwrap();
    let b = run_scenario_text(&format!("{DIAGONAL_Z2}\n"), &quiet()).unwrap();
    assert_eq!(a.scenario.digest.len(), 64);
    assert_ne!(a.scenario.digest, b.scenario.digest);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(dir.path(), "s.json", bundled("wstar_z4_klein.json"));
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("r{i}.json"));
        let o = vne(&["run", &scenario, "--out", out.to_str().unwrap(), "--no-timestamp"]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push(std::fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn seed_override_changes_random_multipliers_only() {
    let text = bundled("diagonal_s3.json");
    let a = run_scenario_text(text, &quiet()).unwrap();
    let b = run_scenario_text(text, &Overrides { seed: Some(5), ..quiet() }).unwrap();
    assert_eq!(b.seed, Some(5));
    // Task 3 induces a random multiplier; task 0 is the kernel.
    assert_ne!(a.task(3).unwrap().values, b.task(3).unwrap().values);
    assert_eq!(a.task(0).unwrap().values, b.task(0).unwrap().values);
}

#[test]
fn malformed_input_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"schema\": 1, \"tasks\": [");
    let o = vne(&["run", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let o = vne(&["run", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn schema_violations_name_the_field() {
    let unknown = DIAGONAL_Z2.replace("\"at\": 0", "\"at\": 0, \"colour\": 1");
    let e = parse_scenario(&unknown).unwrap_err().to_string();
    assert!(e.contains("multipliers.e") && e.contains("colour"), "{e}");

    let e = parse_scenario(&DIAGONAL_Z2.replace("\"schema\": 1", "\"schema\": 2")).unwrap_err();
    assert!(e.to_string().contains("schema"));

    let dangling = DIAGONAL_Z2.replace("\"coupling\": \"d\"", "\"coupling\": \"nope\"");
    let e = run_scenario_text(&dangling, &quiet()).unwrap_err().to_string();
    assert!(e.contains("nope"), "{e}");

    let unseeded = DIAGONAL_Z2.replace(
        "{\"type\": \"delta\", \"group\": \"z2\", \"at\": 0}",
        "{\"type\": \"random\", \"group\": \"z2\", \"seed\": 3}",
    );
    let e = run_scenario_text(&unseeded, &quiet()).unwrap_err().to_string();
    assert!(e.contains("seed"), "{e}");

    let wrong_group = DIAGONAL_Z2.replace("\"group\": \"z2\", \"at\"", "\"group\": {\"type\": \"cyclic\", \"n\": 3}, \"at\"");
    assert!(run_scenario_text(&wrong_group, &quiet()).is_err());
}

#[test]
fn solver_exhaustion_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", DIAGONAL_Z2);
    let o = vne(&["run", &s, "--max-iter", "1", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(3));
    let r = Report::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert!(!r.tasks[0].solver_failures.is_empty());
}

#[test]
fn failed_checks_exit_with_code_one() {
    // Zero slack leaves rounding-level Koopman defects over threshold.
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.json", bundled("wstar_z4_klein.json"));
    let o = vne(&["run", &s, "--tol", "0", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(1));
    let r = Report::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert!(r.tasks.iter().flat_map(|t| &t.checks).any(|c| !c.pass));
    assert_eq!(r.summary.solver_failures, 0);

    let o = vne(&["run", &s, "--tol", "-1e-3"]);
    assert_eq!(o.status.code(), Some(2), "negative slack is an input error");
}

#[test]
fn explicit_coupling_matches_the_builtin_diagonal() {
    let text = r#"{
      "schema": 1,
      "groups": {"z2": {"type": "cyclic", "n": 2}},
      "couplings": {
        "x": {
          "type": "explicit", "gamma": "z2", "lambda": "z2",
          "shape": {"blocks": [{"dim": 1, "weight": 1}, {"dim": 1, "weight": 1}]},
          "gamma_action": {"perms": [[0, 1], [1, 0]], "unitaries": [[[[[1, 0]]], [[[1, 0]]]], [[[[1, 0]]], [[[1, 0]]]]]},
          "lambda_action": {"perms": [[0, 1], [1, 0]], "unitaries": [[[[[1, 0]]], [[[1, 0]]]], [[[[1, 0]]], [[[1, 0]]]]]},
          "q": [[[[1, 0]]], [[[0, 0]]]],
          "p": [[[[1, 0]]], [[[0, 0]]]]
        }
      },
      "tasks": [{"type": "kernel", "coupling": "x"}]
    }"#;
    let r = run_scenario_text(text, &quiet()).unwrap();
    assert!(r.all_passed());
    assert_eq!(r.task(0).unwrap().values["kernel"], serde_json::json!([[1.0, 0.0], [0.0, 1.0]]));
}

#[test]
fn verify_all_reports_every_bundled_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = vne(&["verify-all", "--out", dir.path().to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), BUNDLED.len());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), BUNDLED.len());
}
