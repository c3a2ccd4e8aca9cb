//! End-to-end invocations of the `horae` binary: golden outputs and the
//! 0/1/2 exit-code contract.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn horae(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_horae"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn parse_pretty_prints_and_exits_zero() {
    let out = horae(&["parse", fixture("star.hor").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("shall ("), "{text}");
    assert!(text.contains("[t12 - t11 < t14]"), "{text}");
}

#[test]
fn parse_malformed_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.hor");
    std::fs::write(&path, "shall {object:\"x\" action:\"y\"").unwrap();
    let out = horae(&["parse", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("1:"), "error must carry a location: {err}");
}

#[test]
fn check_contradiction_is_inconsistent_exit_one() {
    let out = horae(&[
        "check",
        fixture("conflict.hor").to_str().unwrap(),
        "--mode",
        "qual",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("inconsistent"));
    assert!(stdout(&out).contains("conflict core: r1, r2"));
}

#[test]
fn check_contradiction_quantitatively_consistent_exit_zero() {
    let out = horae(&[
        "check",
        fixture("conflict.hor").to_str().unwrap(),
        "--mode",
        "quant",
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("consistent"));
}

#[test]
fn check_json_report_is_machine_readable() {
    let out = horae(&[
        "check",
        fixture("conflict.hor").to_str().unwrap(),
        "--mode",
        "qual",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 1);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["verdict"], "inconsistent");
    assert_eq!(value["conflict_core"][0], "r1");
}

#[test]
fn prob_prints_the_running_example_probability() {
    let out = horae(&[
        "prob",
        fixture("star.hor").to_str().unwrap(),
        "--assign",
        fixture("star_assign.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "0.666666666667\n");
}

#[test]
fn prob_exact_oracle_agrees() {
    let out = horae(&[
        "prob",
        fixture("star.hor").to_str().unwrap(),
        "--assign",
        fixture("star_assign.json").to_str().unwrap(),
        "--exact",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "0.666666666667\n");
}

#[test]
fn emit_smt_matches_the_golden_script() {
    let out = horae(&["emit-smt", fixture("single_event.hor").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let golden = std::fs::read_to_string(fixture("single_event.smt2")).unwrap();
    assert_eq!(stdout(&out), golden);
}

#[test]
fn dataset_validation_counts_shapes() {
    let out = horae(&[
        "dataset",
        "validate",
        fixture("srr_sample.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "3 records: 1 validation, 1 composite, 1 single-event\n"
    );
}

#[test]
fn dataset_validation_rejects_length_mismatch() {
    let out = horae(&[
        "dataset",
        "validate",
        fixture("srr_bad.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("length"));
}

#[test]
fn metrics_on_identical_records_score_one() {
    let sample = fixture("srr_sample.json");
    let out = horae(&[
        "metrics",
        "--pred",
        sample.to_str().unwrap(),
        "--gold",
        sample.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["precision"], 1.0);
    assert_eq!(value["recall"], 1.0);
    assert_eq!(value["f1"], 1.0);
}

#[test]
fn abstract_table_provider_reports_classes() {
    let out = horae(&[
        "abstract",
        fixture("leave.hor").to_str().unwrap(),
        "--provider",
        "table",
        "--pairs",
        fixture("leave_pairs.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("12 events in 6 classes\n"), "{}", stdout(&out));
}

#[test]
fn check_with_abstraction_stays_consistent() {
    let out = horae(&[
        "check",
        fixture("leave.hor").to_str().unwrap(),
        "--abstraction",
        fixture("leave_pairs.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("consistent"));
}

#[test]
fn convert_with_mock_fixture_is_deterministic() {
    let rules = fixture("r3_rules.txt");
    let mock_fixture = fixture("r3_fixture.json");
    let args = [
        "convert",
        rules.to_str().unwrap(),
        "--backend",
        "mock",
        "--fixture",
        mock_fixture.to_str().unwrap(),
        "--format",
        "json",
    ];
    let first = horae(&args);
    assert_eq!(code(&first), 0);
    let second = horae(&args);
    assert_eq!(stdout(&first), stdout(&second), "conversion must be byte-stable");
    let value: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(value[0]["relation"], "A | B | C");
    assert_eq!(value[0]["rule"]["rule_type"], "should");
}

#[test]
fn convert_human_output_reparses() {
    let out = horae(&[
        "convert",
        fixture("r3_rules.txt").to_str().unwrap(),
        "--backend",
        "mock",
        "--fixture",
        fixture("r3_fixture.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("should "), "{text}");
    horae::parser::parse_library(&text).expect("converted output is grammar-valid");
}

#[test]
fn convert_against_refused_connection_exits_two() {
    // Bind-and-drop to get a port nothing listens on.
    let port = {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        listener.local_addr().unwrap().port()
    };
    let out = horae(&[
        "convert",
        fixture("r3_rules.txt").to_str().unwrap(),
        "--backend",
        "http",
        "--url",
        &format!("http://127.0.0.1:{port}"),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("transport"));
}

#[test]
fn usage_errors_exit_two() {
    let out = horae(&["check"]);
    assert_eq!(code(&out), 2);
    let out = horae(&["no-such-command"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn parse_json_round_trips_through_serde() {
    let out = horae(&[
        "parse",
        fixture("star.hor").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["rules"][0]["rule_type"], "shall");
}
