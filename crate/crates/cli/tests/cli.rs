//! End-to-end tests of the installed binary: exit codes, report schemas,
//! preset values, CSV layouts, and byte determinism.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quantumness"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("valid JSON report")
}

#[test]
fn pair_preset_reports_square_margin() {
    let out = run(&["qtest-b", "--pair", "builtin:av"]);
    let json = stdout_json(&out);
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["command"], "qtest-b");
    let margin = json["report"]["square_margin"].as_f64().unwrap();
    assert!((margin - (1.0 - 1.25f64.sqrt())).abs() < 1e-9, "margin {margin}");
    assert_eq!(json["report"]["is_quantum"], true);
    assert!(json["report"]["violating_state"].is_object());
}

#[test]
fn setting_preset_reaches_the_quantum_bound() {
    let out = run(&["bchsh", "--preset", "tsirelson"]);
    let json = stdout_json(&out);
    let value = json["report"]["value"].as_f64().unwrap();
    assert!((value - 2.0 * 2.0f64.sqrt()).abs() < 1e-9, "value {value}");
}

#[test]
fn aligned_model_mean_is_exact() {
    let out = run(&[
        "bell-hvm", "--a0", "0", "--a", "0,0,1", "--k", "0,0,1", "--samples", "10",
    ]);
    let json = stdout_json(&out);
    assert_eq!(json["report"]["mc_mean"].as_f64().unwrap(), 1.0);
    assert_eq!(json["samples"], 10);
}

#[test]
fn unknown_subcommand_exits_one() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn malformed_matrix_json_exits_two_with_field_path() {
    let out = run(&[
        "qtest-a",
        "--a", "pauli-x",
        "--b", "pauli-z",
        "--c", r#"{"dim":2,"re":[[1,1],[1,-1]],"im":[[0,0],[0]]}"#,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("im[1]"));
}

#[test]
fn missing_pair_arguments_exit_two() {
    let out = run(&["qtest-b"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_preset_exits_two() {
    let out = run(&["qtest-b", "--pair", "builtin:unknown"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["bchsh", "--preset", "builtin:unknown"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn coarse_quadrature_exits_three() {
    let out = run(&[
        "pairing", "--symbol", "number", "--state", "vacuum",
        "--cutoff", "8", "--spacing", "1.7",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid too coarse"));
}

#[test]
fn pairing_agrees_at_small_cutoff() {
    let out = run(&["pairing", "--symbol", "number", "--state", "number:2", "--cutoff", "8"]);
    let json = stdout_json(&out);
    let integral = json["report"]["integral"].as_f64().unwrap();
    let trace = json["report"]["trace"].as_f64().unwrap();
    assert!((trace - 2.0).abs() < 1e-12);
    assert!((integral - trace).abs() < 1e-3);
}

#[test]
fn csv_rejected_outside_qfunc_and_crossover() {
    let out = run(&["qtest-b", "--pair", "builtin:av", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn qfunc_csv_layout() {
    let out = run(&[
        "qfunc", "--state", "vacuum", "--cutoff", "4", "--spacing", "0.5", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re,im,q"));
    let first = lines.next().unwrap();
    assert_eq!(first.split(',').count(), 3);
    for field in first.split(',') {
        field.parse::<f64>().unwrap();
    }
}

#[test]
fn crossover_csv_layout_and_signs() {
    let out = run(&["crossover", "--pair", "builtin:av", "--format", "csv", "--cutoff", "12"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,margin,term1,term2");
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.01);
    assert!(first[1] < 0.0, "weak-beam margin {}", first[1]);
    assert_eq!(last[0], 100.0);
    assert!(last[1] > 0.0, "bright-beam margin {}", last[1]);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let args = ["separable-scan", "--samples", "2000", "--seed", "7"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let args = ["witness-search", "--dim", "2", "--iterations", "300"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn output_file_resolves_against_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["qtest-b", "--pair", "builtin:av", "--output", "report.json"])
        .env("QUANTUMNESS_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read(dir.path().join("report.json")).unwrap();
    let direct = run(&["qtest-b", "--pair", "builtin:av"]);
    assert_eq!(written, direct.stdout);
}

#[test]
fn stokes_reads_the_horizontal_axis() {
    let out = run(&["stokes", "--xi", "1,0,0,0", "--cutoff", "16"]);
    let json = stdout_json(&out);
    let bloch = &json["report"]["bloch"];
    assert!((bloch["z"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((json["report"]["stokes"]["s0"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn beam_moments_identity_observable() {
    let out = run(&["beam-moments", "--observable", "identity", "--xi", "1,0,1,0", "--cutoff", "20"]);
    let json = stdout_json(&out);
    let report = &json["report"];
    assert!((report["analytic_mean"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((report["analytic_second"].as_f64().unwrap() - 6.0).abs() < 1e-12);
    assert!(
        (report["mean"].as_f64().unwrap() - report["analytic_mean"].as_f64().unwrap()).abs()
            < 1e-8
    );
}

#[test]
fn hvm_defect_separates_parallel_from_orthogonal() {
    let out = run(&[
        "hvm-defect", "--a", "0,0,1", "--b", "0,0,2", "--k", "0,0,1", "--samples", "5000",
    ]);
    let json = stdout_json(&out);
    assert_eq!(json["report"]["defect"].as_f64().unwrap(), 0.0);

    let out = run(&[
        "hvm-defect", "--a", "1,0,0", "--b", "0,1,0", "--k", "0,0,1", "--samples", "5000",
    ]);
    let json = stdout_json(&out);
    assert!(json["report"]["defect"].as_f64().unwrap() > 0.5);
}

#[test]
fn minimality_defaults_pass_for_ordered_pair() {
    let out = run(&["minimality", "--a", r#"{"dim":2,"re":[[1,0],[0,0]],"im":[[0,0],[0,0]]}"#,
        "--b", r#"{"dim":2,"re":[[1.5,0.5],[0.5,0.5]],"im":[[0,0],[0,0]]}"#]);
    let json = stdout_json(&out);
    assert_eq!(json["report"]["minimality_holds"], true);
}

#[test]
fn help_screens_document_the_computation() {
    for (sub, needle) in [
        ("qtest-a", "sumset"),
        ("qtest-b", "B^2 - A^2"),
        ("bell-hvm", "a0 + k . a"),
        ("bchsh", "E(a1,b1)"),
        ("pairing", "tr(rho A)"),
        ("crossover", "N,margin,term1,term2"),
        ("qfunc", "re,im,q"),
        ("stokes", "diag(1,-1)"),
    ] {
        let out = run(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub} --help");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains(needle), "{sub} --help misses {needle:?}");
    }
}

#[test]
fn witness_search_diagonal_mode_stays_classical() {
    let out = run(&["witness-search", "--dim", "3", "--iterations", "200", "--mode", "diagonal"]);
    let json = stdout_json(&out);
    let margin = json["report"]["square_margin"].as_f64().unwrap();
    assert!(margin >= -1e-9, "diagonal-mode margin {margin}");
}
