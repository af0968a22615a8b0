use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qdecohere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdecohere"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn run_into(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    qdecohere(&args)
}

#[test]
fn run_writes_a_complete_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_into(
        tmp.path(),
        &[
            "--channel",
            "bath",
            "--param",
            "1",
            "--qubits",
            "1-3",
            "--samples",
            "500",
            "--bins",
            "10",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));

    let summary = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next().unwrap(),
        "channel,params,class,n,samples,mean,variance,min,max"
    );
    let rows: Vec<&str> = lines.collect();
    // general n=1..3, ghz and w n=2..3
    assert_eq!(rows.len(), 7);
    let w3 = rows
        .iter()
        .find(|r| r.starts_with("bath,gamma1_t=1,w,3,"))
        .unwrap();
    let mean: f64 = w3.split(',').nth(5).unwrap().parse().unwrap();
    assert!((mean - (-2.0f64).exp()).abs() < 1e-12);

    let hist = fs::read_to_string(tmp.path().join("bath_w_n3.hist.csv")).unwrap();
    assert_eq!(hist.lines().count(), 11);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["samples"], 500);
    assert!(manifest["metadata"]["timestamp_unix"].is_u64());
    let files = manifest["files"].as_array().unwrap();
    assert!(files.iter().any(|f| f == "summary.csv"));
    assert!(files.iter().any(|f| f == "figure.json"));

    let figure: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("figure.json")).unwrap()).unwrap();
    assert_eq!(figure[0]["series"].as_array().unwrap().len(), 3);

    assert!(stderr(&out).contains("skipped bath ghz n=1"));
}

#[test]
fn identical_runs_give_identical_summaries() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let common = [
        "--channel",
        "dephasing",
        "--param",
        "2.48",
        "--qubits",
        "2,4",
        "--samples",
        "300",
        "--seed",
        "11",
    ];
    let mut one = common.to_vec();
    one.extend(["--workers", "1"]);
    let mut two = common.to_vec();
    two.extend(["--workers", "2"]);
    assert!(run_into(a.path(), &one).status.success());
    assert!(run_into(b.path(), &two).status.success());
    for name in ["summary.csv", "dephasing_ghz_n4.hist.csv", "figure.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn json_format_writes_summary_json() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_into(
        tmp.path(),
        &[
            "--channel",
            "depolarizing",
            "--mode",
            "per-qubit",
            "--param",
            "0.2",
            "--class",
            "general",
            "--qubits",
            "2",
            "--samples",
            "50",
            "--format",
            "json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(!tmp.path().join("summary.csv").exists());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap())
            .unwrap();
    let row = &doc["rows"][0];
    assert_eq!(row["channel"], "depolarizing");
    assert_eq!(row["params"], "p=0.2;mode=per-qubit");
    assert_eq!(row["samples"], 50);
    assert_eq!(row["histogram_file"], "depolarizing_general_n2.hist.csv");
}

#[test]
fn odd_register_for_collective_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_into(
        tmp.path(),
        &["--channel", "collective", "--param", "5", "--qubits", "3"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("collective dephasing requires even qubit count"));
}

#[test]
fn bad_parameters_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    for extra in [
        &["--channel", "bath", "--param", "-1"][..],
        &["--channel", "depolarizing", "--param", "1.5"][..],
        &["--channel", "nonsense", "--param", "1"][..],
        &["--channel", "bath", "--param", "1", "--qubits", "9"][..],
        &["--channel", "bath", "--param", "1", "--bins", "0"][..],
    ] {
        let out = run_into(tmp.path(), extra);
        assert_eq!(out.status.code(), Some(2), "{extra:?}: {}", stderr(&out));
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = run_into(
        &blocker,
        &[
            "--channel",
            "bath",
            "--param",
            "1",
            "--qubits",
            "1",
            "--samples",
            "5",
        ],
    );
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

fn calibrated_value(out: &Output, key: &str) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn calibrate_matches_dephasing_to_bath() {
    let out = qdecohere(&[
        "calibrate",
        "--channel",
        "dephasing",
        "--match-channel",
        "bath",
        "--match-param",
        "1",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let g2 = calibrated_value(&out, "gamma2_t");
    assert!((g2 - 2.48).abs() < 0.02, "{g2}");
    let target = calibrated_value(&out, "target_mean");
    assert!((calibrated_value(&out, "achieved_mean") - target).abs() <= 1e-4);
}

#[test]
fn calibrate_depolarizing_against_explicit_target() {
    let out = qdecohere(&[
        "calibrate",
        "--channel",
        "depolarizing",
        "--target",
        "0.7634901",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let p = calibrated_value(&out, "p");
    assert!((p - 0.3547).abs() < 0.005, "{p}");
}

#[test]
fn unreachable_target_exits_with_three() {
    let out = qdecohere(&["calibrate", "--channel", "depolarizing", "--target", "0.01"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("unreachable"));
}

#[test]
fn calibrate_without_target_is_a_config_error() {
    let out = qdecohere(&["calibrate", "--channel", "dephasing"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_on_production_sets() {
    let out = qdecohere(&["verify", "--states", "10"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("superoperator/collective"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_names_the_first_failing_check() {
    let out = qdecohere(&["verify", "--states", "5", "--corrupt-kraus"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(
        stderr(&out).contains("verification failed: completeness"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn verify_rejects_large_oracle_registers() {
    let out = qdecohere(&["verify", "--max-n", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reproduce_writes_one_bundle_per_channel() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qdecohere(&[
        "reproduce",
        "--samples",
        "20",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    for channel in ["bath", "dephasing", "collective", "depolarizing"] {
        assert!(
            tmp.path().join(channel).join("summary.csv").exists(),
            "{channel}"
        );
    }
    let summary = fs::read_to_string(tmp.path().join("collective/summary.csv")).unwrap();
    // 3 classes at n = 2, 4, 6, 8
    assert_eq!(summary.lines().count(), 1 + 12);
}
