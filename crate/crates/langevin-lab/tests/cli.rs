//! End-to-end tests of the command-line interface: exit codes, file
//! schemas and thread-count independence.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_langevin-lab"))
}

fn write_config(dir: &Path, seed: u64, out: Option<&Path>) -> std::path::PathBuf {
    let output = out
        .map(|p| format!(",\n        \"output\": \"{}\"", p.display()))
        .unwrap_or_default();
    let text = format!(
        r#"{{
        "target": {{"kind": "gaussian", "mean": [0.0, 0.0], "variances": [1.0, 1.0]}},
        "tail": {{"eta": 1.0, "m_eta": 0.0}},
        "schedule": {{"kind": "dl-ula",
                     "scale": {{"n_mult": 0.001, "gamma_mult": 1.0, "n_cap": 300}}}},
        "outer_iterations": 3,
        "n_chains": 200,
        "seed": {seed},
        "metrics": ["tv", "w2-sliced", "moments"],
        "reference_samples": 5000{output}
    }}"#
    );
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn experiment_writes_series_and_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), 5, Some(&out));
    let status = bin().args(["experiment", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(0));
    for file in ["series.csv", "records.jsonl", "timings.csv", "tv_vs_k.dat", "w2_vs_total.dat"] {
        assert!(out.join(file).exists(), "{file} missing");
    }
    let series = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert!(series.starts_with("outer_k,total_iters,gamma,lambda,tv,w2,mean_norm_sq,frac_outside"));
    assert_eq!(series.lines().count(), 4);
    let records = std::fs::read_to_string(out.join("records.jsonl")).unwrap();
    let header: serde_json::Value = serde_json::from_str(records.lines().next().unwrap()).unwrap();
    assert!(header["config_digest"].is_string());
    assert_eq!(header["n_chains"], 200);
    assert_eq!(records.lines().count(), 1 + 3 * 200);
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("t1");
    let out4 = dir.path().join("t4");
    let cfg1 = write_config(&dir.path().join("."), 9, Some(&out1));
    let status = bin()
        .args(["experiment", "--threads", "1", "--config"])
        .arg(&cfg1)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let cfg4 = {
        let p = dir.path().join("config4.json");
        let text = std::fs::read_to_string(&cfg1)
            .unwrap()
            .replace(&format!("{}", out1.display()), &format!("{}", out4.display()));
        std::fs::write(&p, text).unwrap();
        p
    };
    let status = bin()
        .args(["experiment", "--threads", "4", "--config"])
        .arg(&cfg4)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(
        std::fs::read(out1.join("series.csv")).unwrap(),
        std::fs::read(out4.join("series.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(out1.join("records.jsonl")).unwrap(),
        std::fs::read(out4.join("records.jsonl")).unwrap()
    );
}

#[test]
fn sample_prints_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 5, None);
    let output = bin().args(["sample", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("config digest:"));
    assert!(text.contains("k=1"));
    assert!(text.contains("k=3"));
}

#[test]
fn bad_config_exits_2_and_names_violations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"target": {"kind": "gaussian", "mean": [0.0], "variances": [1.0]},
           "schedule": {"kind": "dl-ula"}, "outer_iterations": 1,
           "n_chains": 1, "typo_key": 3}"#,
    )
    .unwrap();
    let output = bin().args(["experiment", "--config"]).arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("typo_key"), "{err}");
    assert!(err.contains("seed"), "{err}");
}

#[test]
fn missing_file_exits_2() {
    let output = bin()
        .args(["experiment", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn check_bounds_and_report_flow() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    // a small bound suite runs fast and writes bounds.json
    let status = bin()
        .args(["check-bounds", "--pairs", "5", "--mc-draws", "20000", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("bounds.json").exists());

    // an experiment into the same directory gives report its series
    let cfg = write_config(dir.path(), 11, Some(&out));
    assert_eq!(
        bin().args(["experiment", "--config"]).arg(&cfg).status().unwrap().code(),
        Some(0)
    );
    let output = bin().args(["report", "--out"]).arg(&out).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("== metric series =="));
    assert!(text.contains("passed"));

    // a failing bound flips the exit code to 1
    let mut bounds: Vec<serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(out.join("bounds.json")).unwrap()).unwrap();
    bounds[0]["holds"] = serde_json::Value::Bool(false);
    bounds[0]["name"] = serde_json::Value::String("forced-failure".into());
    std::fs::write(out.join("bounds.json"), serde_json::to_string(&bounds).unwrap()).unwrap();
    let output = bin().args(["report", "--out"]).arg(&out).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("forced-failure"), "{text}");
}

#[test]
fn report_without_series_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin().args(["report", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}
