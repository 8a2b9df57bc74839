use std::path::Path;
use std::process::Command;

use patchscale::cli::run;
use patchscale::pipeline::{files, Outcome};
use patchscale::report::Report;

fn args(list: &[&str]) -> Vec<String> {
    std::iter::once("patchscale").chain(list.iter().copied()).map(String::from).collect()
}

fn code(list: &[&str]) -> u8 {
    run(args(list))
}

fn write_tape(path: &Path, rows: &[String]) {
    let mut s = String::from("timestamp,firm_id,stock_id,side,value\n");
    for r in rows {
        s.push_str(r);
        s.push('\n');
    }
    std::fs::write(path, s).unwrap();
}

fn failed_marker(dir: &Path) -> String {
    std::fs::read_to_string(dir.join(files::FAILED)).unwrap()
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&["all", "--bogus"]), 1);
    assert_eq!(code(&["segment", "--output-dir", out, "--theta", "0.4"]), 1);
    assert_eq!(code(&["analyze", "--output-dir", out, "--k", "top:5"]), 1);
    assert_eq!(code(&["all", "--output-dir", out, "--input", "/no/such/tape.csv"]), 1);
    assert_eq!(code(&["all", "--output-dir", out, "--synth", "no-such-preset"]), 1);
    assert_eq!(code(&["all", "--output-dir", out]), 1);
    assert_eq!(
        code(&["segment", "--output-dir", out, "--t-statistic", "welch"]),
        1
    );
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn data_errors_exit_2_and_leave_a_marker() {
    let dir = tempfile::tempdir().unwrap();
    let tape = dir.path().join("bad.csv");
    write_tape(&tape, &["1,F1,S1,B,10".into(), "2,F1,S1,S,-5.0".into()]);
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    assert_eq!(code(&["all", "--output-dir", o, "--input", tape.to_str().unwrap()]), 2);
    let marker = failed_marker(&out);
    assert!(marker.contains("stage: ingest") && marker.contains("line 3"), "{marker}");

    let empty = dir.path().join("empty");
    assert_eq!(code(&["segment", "--output-dir", empty.to_str().unwrap()]), 2);
    assert!(failed_marker(&empty).contains("missing artifact"));
    assert_eq!(code(&["report", "--output-dir", empty.to_str().unwrap()]), 2);
    assert!(failed_marker(&empty).contains(files::INGEST));
}

/// Every firm buys twelve lots then sells twelve: all patches share the
/// same T, N_m and V_m, so no estimator has anything to work with.
#[test]
fn degenerate_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let tape = dir.path().join("flat.csv");
    let mut rows = Vec::new();
    for firm in 0..40 {
        let t0 = 1_009_843_200u64;
        for (i, side) in ["B", "S"].iter().enumerate() {
            for j in 0..12 {
                rows.push(format!("{},F{firm},S1,{side},100", t0 + 60 * (12 * i as u64 + j)));
            }
        }
    }
    write_tape(&tape, &rows);
    let out = dir.path().join("out");
    let c = code(&[
        "all",
        "--output-dir",
        out.to_str().unwrap(),
        "--input",
        tape.to_str().unwrap(),
        "--activity-filter",
        "off",
    ]);
    assert_eq!(c, 3);
    assert!(failed_marker(&out).contains("stage: analyze"));
}

#[test]
fn no_directional_patches_gives_empty_markers() {
    let dir = tempfile::tempdir().unwrap();
    let tape = dir.path().join("churn.csv");
    let rows: Vec<String> = (0..400)
        .map(|i| {
            let side = if i % 2 == 0 { "B" } else { "S" };
            format!("{},F1,S1,{side},{}", 1_009_843_200 + 30 * i, 100 + i % 7)
        })
        .collect();
    write_tape(&tape, &rows);
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    let c = code(&["all", "--output-dir", o, "--input", tape.to_str().unwrap(), "--activity-filter", "off"]);
    assert_eq!(c, 0);
    assert!(!out.join(files::FAILED).exists());
    let report: Report = serde_json::from_str(&std::fs::read_to_string(out.join(files::REPORT)).unwrap()).unwrap();
    assert_eq!(report.counts.directional, 0);
    assert!(report.counts.non_directional > 0);
    for g in &report.groups {
        assert!(g.tails.iter().all(|t| matches!(t, Outcome::Empty { .. })));
        assert!(matches!(g.allometry_bi, Outcome::Empty { .. }));
        assert!(matches!(g.allometry_tri, Outcome::Empty { .. }));
        assert!(matches!(g.per_firm_exponents, Outcome::Empty { .. }));
        for l in &g.lognormality {
            assert!(matches!(l.per_firm, Outcome::Empty { .. }));
            assert!(matches!(l.pooled, Outcome::Empty { .. }));
        }
    }
    let text = std::fs::read_to_string(out.join(files::REPORT)).unwrap();
    assert!(text.contains("\"status\": \"empty\""));
}

#[test]
fn activity_filter_applies_to_real_tapes() {
    let dir = tempfile::tempdir().unwrap();
    let tape = dir.path().join("t.csv");
    write_tape(&tape, &["1009843200,F1,S1,B,10".into(), "1009843260,F1,S1,B,10".into()]);
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    assert_eq!(code(&["ingest", "--output-dir", o, "--input", tape.to_str().unwrap()]), 0);
    let ingest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join(files::INGEST)).unwrap()).unwrap();
    assert_eq!(ingest["filter_applied"], true);
    assert_eq!(ingest["trades_kept"], 0);
    assert_eq!(
        code(&["ingest", "--output-dir", o, "--input", tape.to_str().unwrap(), "--min-trades-per-year", "1", "--min-active-days", "1"]),
        0
    );
    let ingest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join(files::INGEST)).unwrap()).unwrap();
    assert_eq!(ingest["trades_kept"], 2);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"seed": 5, "segmentation": {"theta": 0.8}, "analysis": {"bootstrap_samples": 200}}"#).unwrap();
    let out = dir.path().join("out");
    let c = code(&[
        "all",
        "--config",
        cfg.to_str().unwrap(),
        "--output-dir",
        out.to_str().unwrap(),
        "--synth",
        "default",
        "--theta",
        "0.9",
    ]);
    assert_eq!(c, 0);
    let report: Report = serde_json::from_str(&std::fs::read_to_string(out.join(files::REPORT)).unwrap()).unwrap();
    assert_eq!(report.settings.segmentation.theta, 0.9);
    assert_eq!(report.settings.analysis.bootstrap_samples, 200);
    std::fs::write(&cfg, r#"{"seeed": 5}"#).unwrap();
    assert_eq!(code(&["report", "--config", cfg.to_str().unwrap()]), 1);
}

#[test]
fn staged_run_matches_all() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    let common = ["--seed", "3", "--bootstrap-samples", "200"];
    let mut all = vec!["all", "--output-dir", a, "--synth", "default"];
    all.extend(common);
    assert_eq!(code(&all), 0);
    assert_eq!(code(&["synth", "--output-dir", b, "--preset", "default", "--seed", "3"]), 0);
    assert_eq!(code(&["ingest", "--output-dir", b]), 0);
    assert_eq!(code(&["segment", "--output-dir", b, "--seed", "3"]), 0);
    assert_eq!(code(&["analyze", "--output-dir", b, "--seed", "3", "--bootstrap-samples", "200"]), 0);
    assert_eq!(code(&["report", "--output-dir", b]), 0);
    let read = |d: &str| std::fs::read_to_string(Path::new(d).join(files::REPORT)).unwrap();
    let (ra, rb) = (read(a), read(b));
    // Only the input label differs: the staged run never saw the preset name.
    assert_eq!(
        ra.replace("synth-preset:default", "tape:tape.csv"),
        rb
    );
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_patchscale");
    let st = Command::new(bin).arg("--version").output().unwrap();
    assert!(st.status.success());
    let st = Command::new(bin).args(["all", "--nope"]).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let st = Command::new(bin)
        .args(["analyze", "--output-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("patches.csv"));
}
