//! End-to-end tests of the binary: exit codes, report schema, config
//! handling, and byte-level determinism.

use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_postulatelab"));
    cmd.env_remove("POSTULATELAB_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn quantum_axioms_pass_with_exit_zero() {
    let out = run(&["check-axioms", "--star", "quantum", "--dims", "2,2,2", "--trials", "200", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["command"], "check-axioms");
    assert_eq!(report["passed"], true);
    let violations = report["result"]["violations"].as_object().unwrap();
    assert_eq!(violations.len(), 8);
    for (axiom, v) in violations {
        assert!(v.as_f64().unwrap() < 1e-9, "{axiom} too large: {v}");
    }
}

#[test]
fn broken_star_fails_with_exit_one() {
    let out = run(&["check-axioms", "--star", "broken", "--trials", "300", "--seed", "808"]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["passed"], false);
    assert!(report["result"]["violations"]["bilinearity"].as_f64().unwrap() > 1e-4);
}

#[test]
fn bell_state_readout_scenario_flags_signalling() {
    let out = run(&["signalling", "--state", "bell", "--remote", "z", "--device", "sr"]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    let tv = report["result"]["tv_distance"].as_f64().unwrap();
    assert!((tv - 1.0).abs() < 1e-12);
    assert_eq!(report["result"]["signalling"], true);
}

#[test]
fn born_device_does_not_signal() {
    let out = run(&["signalling", "--state", "bell", "--remote", "z", "--device", "born"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert!(report["result"]["tv_distance"].as_f64().unwrap() < 1e-9);
}

#[test]
fn span_rank_reports_growth() {
    let out = run(&["span-rank", "--family", "entropy-bin", "--n", "32", "--m", "256", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["classification"]["kind"], "growing");
    let ranks = report["result"]["profile"]["ranks"].as_array().unwrap();
    assert_eq!(ranks.len(), 32);
}

#[test]
fn reports_are_byte_identical_for_fixed_seed_single_thread() {
    let args = [
        "span-rank", "--family", "born", "--n", "16", "--m", "128",
        "--seed", "5", "--threads", "1",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let args = ["check-axioms", "--trials", "100", "--seed", "9", "--threads", "1"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_format_emits_tables() {
    let out = run(&["fpem", "--p", "0.2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("bin,probability\n"));
    assert!(text.contains("bin:0.72,1"));
}

#[test]
fn out_flag_writes_the_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "space-dims", "--dim", "2", "--seed", "3",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["result"]["dims"]["dim_states"], 3);
    assert_eq!(report["result"]["dims"]["dim_effects"], 4);
    assert_eq!(report["result"]["duality_holds"], true);
}

#[test]
fn named_scenarios_exist_and_run() {
    let out = run(&["list-scenarios"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["bell-sr-signalling", "spo-sequential-nonquantum", "fpem-span-growth"] {
        assert!(text.contains(id), "catalog misses {id}");
    }

    let out = run(&["run", "fpem-bins"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["run", "bell-sr-signalling"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn spo_scenario_certifies_nonquantum_statistics() {
    let out = run(&["spo", "--samples", "256", "--seed", "404"]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert!(report["result"]["joint_cell_residual"].as_f64().unwrap() > 0.01);
    assert!(report["result"]["born_control_residual"].as_f64().unwrap() < 1e-8);
    let joint = report["result"]["joint"].as_array().unwrap();
    for row in joint {
        for cell in row.as_array().unwrap() {
            assert!((cell.as_f64().unwrap() - 0.25).abs() < 1e-12);
        }
    }
}

#[test]
fn config_file_runs_and_seed_resolution_holds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        r#"{"command": "check-axioms", "seed": 123, "params": {"trials": 50}}"#,
    )
    .unwrap();
    let out = run(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["seed"], 123);
    assert_eq!(report["params"]["trials"], 50);

    // --seed flag wins over the config seed
    let out = run(&["run", "--config", path.to_str().unwrap(), "--seed", "9"]);
    let report = stdout_json(&out);
    assert_eq!(report["seed"], 9);
}

#[test]
fn env_seed_is_the_fallback() {
    let out = bin()
        .args(["check-axioms", "--trials", "10"])
        .env("POSTULATELAB_SEED", "777")
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["seed"], 777);
}

#[test]
fn bad_configs_exit_two_with_field_names() {
    let dir = tempfile::tempdir().unwrap();

    let path = dir.path().join("unknown.json");
    std::fs::write(&path, r#"{"command": "check-axioms", "params": {"trils": 50}}"#).unwrap();
    let out = run(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trils"));

    let path = dir.path().join("badtol.json");
    std::fs::write(&path, r#"{"command": "check-axioms", "params": {"tol": -1.0}}"#).unwrap();
    let out = run(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tol"));

    let out = run(&["check-axioms", "--star", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["run", "no-such-scenario"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn undersampled_span_rank_is_a_usage_error() {
    let out = run(&["span-rank", "--n", "32", "--m", "64"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("samples"));
}
